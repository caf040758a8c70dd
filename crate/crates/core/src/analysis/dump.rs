use crate::ir::{BlockId, Function, InstKind, Operand, TermKind, ValueDef, ValueId};

/// Per-block ordered list of values to trace. Always a subset of the block
/// state, in block-state order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DumpSet {
    pub blocks: Vec<Vec<ValueId>>,
}

impl DumpSet {
    pub fn block(&self, b: BlockId) -> &[ValueId] {
        &self.blocks[b.index()]
    }
}

/// Selects a block-state value when at least one holds:
/// it carries a source name (non-numeric), it is a non-constant gep index,
/// it is an address or value of a load or store, or it is returned.
pub fn select_dump_variables(f: &Function) -> DumpSet {
    let mut wanted = vec![false; f.values.len()];
    for (i, v) in f.values.iter().enumerate() {
        wanted[i] = v.is_source_named();
    }
    let is_const = |v: ValueId| {
        matches!(f.value(v).def, ValueDef::Inst { block, index }
            if matches!(f.block(block).instructions[index].kind, InstKind::Const { .. }))
    };
    let mark = |op: Operand, wanted: &mut Vec<bool>| {
        if let Operand::Value(v) = op {
            wanted[v.index()] = true;
        }
    };
    for (_, inst) in f.instructions() {
        match &inst.kind {
            InstKind::Gep { indices, .. } => {
                for g in indices {
                    if let Operand::Value(v) = g.index {
                        if !is_const(v) {
                            wanted[v.index()] = true;
                        }
                    }
                }
            }
            InstKind::Load { addr, .. } => {
                mark(*addr, &mut wanted);
                if let Some(r) = inst.result {
                    wanted[r.index()] = true;
                }
            }
            InstKind::Store { addr, value, .. } => {
                mark(*addr, &mut wanted);
                mark(*value, &mut wanted);
            }
            _ => {}
        }
    }
    for b in &f.blocks {
        if let TermKind::Ret { value } = b.terminator.kind {
            mark(value, &mut wanted);
        }
    }
    DumpSet {
        blocks: f
            .blocks
            .iter()
            .map(|b| b.state.iter().copied().filter(|v| wanted[v.index()]).collect())
            .collect(),
    }
}
