use super::{
    build_cfg, dominator_tree, BlockId, Diagnostic, Function, InstKind, Operand, Program, TermKind,
    ValueDef, ValueId,
};

/// Structural checks that need the whole function: control flow, phi
/// placement, reachability and def-before-use under dominance.
pub(super) fn validate_program(program: &Program, diags: &mut Vec<Diagnostic>) {
    for f in &program.functions {
        validate_function(f, diags);
    }
}

fn validate_function(f: &Function, diags: &mut Vec<Diagnostic>) {
    let mut push = |line: usize, message: String| diags.push(Diagnostic { line, message });

    for b in &f.blocks {
        match &b.terminator.kind {
            TermKind::Br { then_, else_, .. } if then_ == else_ => push(
                b.terminator.line,
                "conditional branch with identical targets; use jmp".into(),
            ),
            _ => {}
        }
        if b.terminator.kind.successors().contains(&BlockId(0)) {
            push(
                b.terminator.line,
                format!("the root block '{}' cannot be a branch target", f.blocks[0].label),
            );
        }
    }

    let cfg = build_cfg(f);
    let reachable = cfg.reachable();
    let mut any_dead = false;
    for (b, r) in f.blocks.iter().zip(&reachable) {
        if !r {
            any_dead = true;
            push(b.line, format!("block '{}' is unreachable from the root (dead)", b.label));
        }
    }

    for b in &f.blocks {
        let mut seen_non_phi = false;
        for inst in &b.instructions {
            match &inst.kind {
                InstKind::Phi { incoming, .. } => {
                    if seen_non_phi {
                        push(inst.line, "phi must appear at the head of its block".into());
                    }
                    let preds = cfg.preds(b.id);
                    let mut from: Vec<BlockId> = incoming.iter().map(|(_, p)| *p).collect();
                    from.sort();
                    let mut expected = preds.to_vec();
                    expected.sort();
                    if from != expected {
                        let names = |v: &[BlockId]| {
                            v.iter().map(|x| f.block(*x).label.as_str()).collect::<Vec<_>>().join(", ")
                        };
                        push(
                            inst.line,
                            format!(
                                "phi needs exactly one incoming value per predecessor [{}], got [{}]",
                                names(&expected),
                                names(&from)
                            ),
                        );
                    }
                }
                _ => seen_non_phi = true,
            }
        }
    }

    if any_dead {
        return;
    }
    let Ok(dom) = dominator_tree(&cfg) else { return };

    // `available(v, block, index)`: the definition of v executes before
    // position `index` of `block` on every path from the root.
    let available = |v: ValueId, block: BlockId, index: usize| match f.value(v).def {
        ValueDef::Param(_) => true,
        ValueDef::Inst { block: d, index: di } => {
            if d == block {
                di < index
            } else {
                dom.dominates(d, block)
            }
        }
    };

    for b in &f.blocks {
        for (i, inst) in b.instructions.iter().enumerate() {
            if let InstKind::Phi { incoming, .. } = &inst.kind {
                for (op, pred) in incoming {
                    if let Operand::Value(v) = op {
                        if !available(*v, *pred, usize::MAX) {
                            push(
                                inst.line,
                                format!(
                                    "%{} is not defined on every path into '{}' (use before def)",
                                    f.value_name(*v),
                                    f.block(*pred).label
                                ),
                            );
                        }
                    }
                }
                continue;
            }
            for op in inst.kind.operands() {
                if let Operand::Value(v) = op {
                    if !available(v, b.id, i) {
                        push(
                            inst.line,
                            format!("%{} is used before its definition", f.value_name(v)),
                        );
                    }
                }
            }
        }
        for op in b.terminator.kind.operands() {
            if let Operand::Value(v) = op {
                if !available(v, b.id, usize::MAX) {
                    push(
                        b.terminator.line,
                        format!("%{} is used before its definition", f.value_name(v)),
                    );
                }
            }
        }
    }
}
