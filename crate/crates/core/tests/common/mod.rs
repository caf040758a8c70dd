//! Reference implementations used as test oracles. Shared with the
//! acceptance target of the cli crate through `#[path]`.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use invscov_core::analysis::{ComparabilityMap, ProgramAnalysis};
use invscov_core::feedback::{CheckPlan, CoverageHooks, CoverageMap};
use invscov_core::interp::{BlockExit, ExecutionResult, Fault, FaultKind, Hooks, InstEvent, Interpreter, Limits, MemWrite};
use invscov_core::ir::{BlockId, FuncId, Function, InstKind, Operand, Program, TermKind, ValueId};
use invscov_core::miner::{BlockStateRecord, Invariant, InvariantKind};
use rand::Rng;

// ---------------------------------------------------------------- dominators

/// Dominator sets by intersecting the vertex sets of every simple path from
/// block 0. `None` for unreachable blocks.
pub fn brute_force_dominators(succs: &[Vec<usize>]) -> Vec<Option<BTreeSet<usize>>> {
    let n = succs.len();
    let mut doms: Vec<Option<BTreeSet<usize>>> = vec![None; n];
    let mut path = vec![0usize];
    let mut on_path = vec![false; n];
    on_path[0] = true;
    fn walk(
        succs: &[Vec<usize>],
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        doms: &mut [Option<BTreeSet<usize>>],
    ) {
        let here = *path.last().unwrap();
        let set: BTreeSet<usize> = path.iter().copied().collect();
        doms[here] = Some(match doms[here].take() {
            None => set,
            Some(d) => d.intersection(&set).copied().collect(),
        });
        for &s in &succs[here] {
            if !on_path[s] {
                on_path[s] = true;
                path.push(s);
                walk(succs, path, on_path, doms);
                path.pop();
                on_path[s] = false;
            }
        }
    }
    walk(succs, &mut path, &mut on_path, &mut doms);
    doms
}

/// A random CFG of `n` blocks rooted at 0 in which every block is reachable.
pub fn random_cfg<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<usize>> {
    let mut succs = vec![Vec::new(); n];
    for b in 1..n {
        let from = rng.gen_range(0..b);
        succs[from].push(b);
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if !succs[a].contains(&b) {
            succs[a].push(b);
        }
    }
    succs
}

// ------------------------------------------------------------- comparability

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Pair-merge events of the comparability walk: unary/cast (result,
/// operand), binary (result, each operand), gep (result, base) and (first
/// index, other index). Loads only mark their result as classified.
pub fn comparability_events(f: &Function) -> (Vec<(ValueId, ValueId)>, BTreeSet<ValueId>) {
    let mut merges = Vec::new();
    let mut loads = BTreeSet::new();
    let val = |o: &Operand| o.as_value();
    for (_, inst) in f.instructions() {
        let Some(r) = inst.result else { continue };
        match &inst.kind {
            InstKind::Unary { arg, .. } | InstKind::Cast { arg, .. } => {
                merges.extend(val(arg).map(|a| (r, a)));
            }
            InstKind::Binary { lhs, rhs, .. } => {
                merges.extend(val(lhs).map(|a| (r, a)));
                merges.extend(val(rhs).map(|a| (r, a)));
            }
            InstKind::Gep { base, indices } => {
                merges.extend(val(base).map(|a| (r, a)));
                if let Some(first) = indices.first().and_then(|i| val(&i.index)) {
                    for other in &indices[1..] {
                        merges.extend(val(&other.index).map(|o| (first, o)));
                    }
                }
            }
            InstKind::Load { .. } => {
                loads.insert(r);
            }
            _ => {}
        }
    }
    (merges.into_iter().filter(|(a, b)| a != b).collect(), loads)
}

/// Transitive closure of the merge events: a canonical class label per
/// value, `None` for values no event touched (ε).
pub fn comparability_oracle(f: &Function) -> Vec<Option<usize>> {
    let n = f.values.len();
    let (merges, loads) = comparability_events(f);
    let mut uf = UnionFind((0..n).collect());
    let mut touched = vec![false; n];
    for (a, b) in &merges {
        uf.union(a.index(), b.index());
        touched[a.index()] = true;
        touched[b.index()] = true;
    }
    for l in &loads {
        touched[l.index()] = true;
    }
    (0..n).map(|v| touched[v].then(|| uf.find(v))).collect()
}

/// Whether `map` induces exactly the oracle's partition (and ε set).
pub fn same_partition(map: &ComparabilityMap, oracle: &[Option<usize>]) -> Result<(), String> {
    let n = oracle.len();
    for a in 0..n {
        let ca = map.class(ValueId(a as u32));
        if ca.is_some() != oracle[a].is_some() {
            return Err(format!("value {a}: classified={} oracle={}", ca.is_some(), oracle[a].is_some()));
        }
        for b in a + 1..n {
            let cb = map.class(ValueId(b as u32));
            if let (Some(x), Some(y), Some(ox), Some(oy)) = (ca, cb, oracle[a], oracle[b]) {
                if (x == y) != (ox == oy) {
                    return Err(format!("values {a},{b}: same={} oracle same={}", x == y, ox == oy));
                }
            }
        }
    }
    Ok(())
}

// ----------------------------------------------------------------- templates

/// Independent evaluation of a template: `vals` holds x (and y).
pub fn template_holds(kind: &InvariantKind, vals: &[i128]) -> bool {
    let x = vals[0];
    match kind {
        InvariantKind::ConstEqual(c) => x == *c,
        InvariantKind::OneOf(set) => set.contains(&x),
        InvariantKind::LowerBound(c) => !(x < *c),
        InvariantKind::UpperBound(c) => !(x > *c),
        InvariantKind::NonZero => x != 0,
        InvariantKind::EqVars => x == vals[1],
        InvariantKind::LeVars => !(x > vals[1]),
        InvariantKind::Linear { a, b } => vals[1] - b == a * x,
    }
}

/// Values of the invariant's variables in a trace record of its block.
pub fn record_values(analysis: &ProgramAnalysis, inv: &Invariant, rec: &BlockStateRecord) -> Vec<i128> {
    let dump = analysis.func(inv.function).dump.block(inv.block);
    inv.vars
        .iter()
        .map(|v| {
            let pos = dump.iter().position(|d| d == v).expect("invariant variable is dumped");
            rec.values[pos]
        })
        .collect()
}

/// Invariants evaluated at every exit of their block; counts violations.
pub struct InvariantWatcher<'a> {
    by_block: BTreeMap<(FuncId, BlockId), Vec<&'a Invariant>>,
    pub checked: u64,
    pub violations: Vec<(u32, Vec<i128>)>,
}

impl<'a> InvariantWatcher<'a> {
    pub fn new(invs: impl IntoIterator<Item = &'a Invariant>) -> Self {
        let mut by_block: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for inv in invs {
            by_block.entry((inv.function, inv.block)).or_default().push(inv);
        }
        InvariantWatcher { by_block, checked: 0, violations: Vec::new() }
    }
}

impl Hooks for InvariantWatcher<'_> {
    fn block_exit(&mut self, exit: &BlockExit<'_>) {
        if let Some(invs) = self.by_block.get(&(exit.function, exit.block)) {
            for inv in invs {
                let vals: Vec<i128> = inv.vars.iter().map(|v| exit.value(*v)).collect();
                self.checked += 1;
                if !template_holds(&inv.kind, &vals) {
                    self.violations.push((inv.id, vals));
                }
            }
        }
    }
}

// --------------------------------------------------------- block-state observation

fn operand_value(state: &BTreeMap<ValueId, i128>, op: &Operand) -> Option<i128> {
    match op {
        Operand::Const(c) => Some(*c),
        Operand::Value(v) => state.get(v).copied(),
    }
}

/// Per-instruction reference tracer: groups `instruction` events by block
/// activation, one open activation per call frame.
#[derive(Default)]
pub struct ReferenceTracer {
    frames: Vec<Option<Vec<InstEvent>>>,
    pub activations: Vec<Vec<InstEvent>>,
}

impl ReferenceTracer {
    /// Closes the activation still open when the run returned normally.
    pub fn finish(&mut self) {
        self.close_top();
        self.frames.clear();
    }

    fn close_top(&mut self) {
        if let Some(top) = self.frames.last_mut().and_then(Option::take) {
            self.activations.push(top);
        }
    }
}

impl Hooks for ReferenceTracer {
    fn block_enter(&mut self, _p: &Program, _f: FuncId, _b: BlockId) {
        if self.frames.is_empty() {
            self.frames.push(None);
        }
        self.close_top();
        *self.frames.last_mut().unwrap() = Some(Vec::new());
    }
    fn instruction(&mut self, e: &InstEvent) {
        self.frames.last_mut().and_then(Option::as_mut).expect("open activation").push(e.clone());
    }
    fn call(&mut self, _callee: FuncId) {
        self.frames.push(None);
    }
    fn ret(&mut self) {
        self.close_top();
        self.frames.pop();
    }
    fn fault(&mut self, fault: &Fault) {
        // A `bug` terminator ends an activation that did complete its body;
        // any other fault cuts the block short and leaves it unobserved.
        if fault.kind == FaultKind::BugInstruction {
            self.close_top();
        }
        self.frames.clear();
    }
}

/// Rebuilds each block's per-instruction events from its exit state alone,
/// and checks that every stored value is part of that state.
pub struct BlockObserver<'p> {
    program: &'p Program,
    pub activations: Vec<Vec<InstEvent>>,
    /// Stores whose value operand is missing from the block state.
    pub store_failures: Vec<String>,
    pub stores_seen: u64,
    writes: Vec<Vec<MemWrite>>,
}

impl<'p> BlockObserver<'p> {
    pub fn new(program: &'p Program) -> Self {
        BlockObserver {
            program,
            activations: Vec::new(),
            store_failures: Vec::new(),
            stores_seen: 0,
            writes: vec![Vec::new()],
        }
    }
}

impl Hooks for BlockObserver<'_> {
    fn instruction(&mut self, e: &InstEvent) {
        // Only used to collect the writes the block actually performed.
        if let Some(w) = e.write {
            self.writes.last_mut().unwrap().push(w);
        }
    }
    fn call(&mut self, _callee: FuncId) {
        self.writes.push(Vec::new());
    }
    fn ret(&mut self) {
        self.writes.pop();
    }
    fn block_exit(&mut self, exit: &BlockExit<'_>) {
        let f = self.program.func(exit.function);
        let block = f.block(exit.block);
        let state: BTreeMap<ValueId, i128> = exit.state().values.into_iter().collect();
        let mut events = Vec::new();
        for (index, inst) in block.instructions.iter().enumerate() {
            let binding = inst.result.map(|r| (r, state[&r]));
            let write = match &inst.kind {
                InstKind::Store { ty, addr, value } => {
                    self.stores_seen += 1;
                    if let Operand::Value(v) = value {
                        if !state.contains_key(v) {
                            self.store_failures
                                .push(format!("{}: stored {} not in state", f.ppt_name(exit.block), f.value_name(*v)));
                        }
                    }
                    match (operand_value(&state, addr), operand_value(&state, value)) {
                        (Some(a), Some(v)) => Some(MemWrite { addr: a as u64, ty: *ty, value: v }),
                        _ => None,
                    }
                }
                _ => None,
            };
            events.push(InstEvent { function: exit.function, block: exit.block, index, binding, write });
        }
        // Memory side effect of the block must be recoverable from its state.
        let written = std::mem::take(self.writes.last_mut().unwrap());
        let predicted: Vec<MemWrite> = events.iter().filter_map(|e| e.write).collect();
        if written != predicted {
            self.store_failures.push(format!(
                "{}: writes {written:?} but state predicts {predicted:?}",
                f.ppt_name(exit.block)
            ));
        }
        if !matches!(block.terminator.kind, TermKind::Bug) {
            events.push(InstEvent {
                function: exit.function,
                block: exit.block,
                index: block.instructions.len(),
                binding: None,
                write: None,
            });
        }
        self.activations.push(events);
    }
}

/// Runs both hooks side by side.
pub struct Both<A, B>(pub A, pub B);

impl<A: Hooks, B: Hooks> Hooks for Both<A, B> {
    fn block_enter(&mut self, p: &Program, f: FuncId, b: BlockId) {
        self.0.block_enter(p, f, b);
        self.1.block_enter(p, f, b);
    }
    fn block_exit(&mut self, exit: &BlockExit<'_>) {
        self.0.block_exit(exit);
        self.1.block_exit(exit);
    }
    fn instruction(&mut self, e: &InstEvent) {
        self.0.instruction(e);
        self.1.instruction(e);
    }
    fn call(&mut self, c: FuncId) {
        self.0.call(c);
        self.1.call(c);
    }
    fn ret(&mut self) {
        self.0.ret();
        self.1.ret();
    }
    fn fault(&mut self, fault: &Fault) {
        self.0.fault(fault);
        self.1.fault(fault);
    }
}

/// Store coverage and stream reconstruction for one execution.
pub struct BlockStateCheck {
    pub result: ExecutionResult,
    pub store_coverage: Vec<String>,
    pub reconstruction: Option<String>,
    pub blocks: usize,
    pub stores: u64,
}

pub fn check_block_states(interp: &mut Interpreter<'_>, input: &[u8]) -> BlockStateCheck {
    let program = interp.program();
    let mut hooks = Both(ReferenceTracer::default(), BlockObserver::new(program));
    let result = interp.run_entry(input, &mut hooks);
    let Both(mut reference, observer) = hooks;
    reference.finish();
    let mut reconstruction = None;
    let n = reference.activations.len();
    if observer.activations.len() != n {
        reconstruction = Some(format!("{} activations traced, {} observed", n, observer.activations.len()));
    } else if let Some(i) = (0..n).find(|&i| reference.activations[i] != observer.activations[i]) {
        reconstruction = Some(format!(
            "activation {i}: traced {:?}, reconstructed {:?}",
            reference.activations[i], observer.activations[i]
        ));
    }
    BlockStateCheck {
        result,
        store_coverage: observer.store_failures,
        reconstruction,
        blocks: n,
        stores: observer.stores_seen,
    }
}

// -------------------------------------------------------------------- ranges

/// Records every binding that falls outside the static range of its value.
pub struct RangeWatcher<'a> {
    pub analysis: &'a ProgramAnalysis,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl Hooks for RangeWatcher<'_> {
    fn instruction(&mut self, e: &InstEvent) {
        if let Some((v, x)) = e.binding {
            self.checked += 1;
            let r = self.analysis.func(e.function).ranges.get(v);
            if !r.contains(x) {
                self.violations.push(format!("fn {} value {} = {x} outside [{}, {}]", e.function.0, v.0, r.lo, r.hi));
            }
        }
    }
}

// ------------------------------------------------------------------ coverage

pub fn coverage_map(program: &Program, plan: &CheckPlan, input: &[u8]) -> (CoverageMap, Vec<(FuncId, BlockId, u32, u16)>) {
    let mut map = CoverageMap::new();
    let mut interp = Interpreter::new(program, Limits::default());
    let mut hooks = CoverageHooks::new(&mut map, plan, program.entry);
    hooks.record_outcomes = true;
    interp.run_entry(input, &mut hooks);
    let outcomes = hooks.outcomes.iter().map(|(f, b, id, o)| (*f, *b, *id, o.0)).collect();
    (map, outcomes)
}

// -------------------------------------------------------------- set covering

/// Size of a minimum set cover, by exhaustive search.
pub fn exhaustive_min_cover(sets: &[&[u32]]) -> usize {
    let universe: BTreeSet<u32> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    let mut best = sets.len();
    for mask in 0u32..(1 << sets.len()) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let covered: BTreeSet<u32> =
            (0..sets.len()).filter(|i| mask & (1 << i) != 0).flat_map(|i| sets[i].iter().copied()).collect();
        if covered == universe {
            best = k;
        }
    }
    best
}

// -------------------------------------------------------------------- inputs

/// Random inputs mixed with mutations of `interesting` ones.
pub fn random_inputs<R: Rng>(rng: &mut R, n: usize, max_len: usize, interesting: &[Vec<u8>]) -> Vec<Vec<u8>> {
    (0..n)
        .map(|_| {
            if !interesting.is_empty() && rng.gen_bool(0.5) {
                let base = &interesting[rng.gen_range(0..interesting.len())];
                invscov_core::fuzzer::mutate(base, None, max_len, rng)
            } else {
                let len = rng.gen_range(0..=max_len);
                let mut v = vec![0u8; len];
                rng.fill(&mut v[..]);
                v
            }
        })
        .collect()
}

/// Hand-picked inputs per suite target: one reaching the planted fault and
/// one benign.
pub fn known_inputs(target: &str) -> Vec<Vec<u8>> {
    let pair: (&[u8], &[u8]) = match target {
        "seq_match" => (b"xx\x5a\xc3\x17", b"hello, world"),
        "magic_xor" => (b"\x00\x01\x02\x03\x80\xde\xad\xbe", b"\x00\x01\x02\x03\x04"),
        "branch_magic" => (b"FUZZ", b"FUZ!"),
        "div_len" => (b"1234567", b"123456"),
        "oob_table" => (b"\x01\x12", b"\x01\x0f"),
        "nested_parse" => (b"L\x09a\x05xy", b"A\x01zL\x02B\x00"),
        _ => return Vec::new(),
    };
    vec![pair.0.to_vec(), pair.1.to_vec()]
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A random straight-line function exercising every instruction kind the
/// comparability walk looks at, `n` instructions before the `ret`.
pub fn random_dataflow_function<R: Rng>(rng: &mut R, n: usize) -> String {
    const INT: [&str; 3] = ["u8", "u32", "u64"];
    const BIN: [&str; 7] = ["add", "sub", "mul", "and", "or", "xor", "shl"];
    let mut ints: Vec<(String, &str)> =
        vec![("%x".into(), "u64"), ("%y".into(), "u32"), ("%z".into(), "u8"), ("%w".into(), "u64")];
    let mut ptrs: Vec<String> = vec!["%p".into(), "%q".into()];
    let mut body = String::new();
    for k in 0..n {
        let name = if rng.gen_bool(0.5) { format!("%v{k}") } else { format!("%{k}") };
        let pick = |rng: &mut R, ints: &[(String, &'static str)]| ints[rng.gen_range(0..ints.len())].clone();
        let line = match rng.gen_range(0..10) {
            0 | 1 => {
                let (a, ty) = pick(rng, &ints);
                let same: Vec<_> = ints.iter().filter(|(_, t)| *t == ty).collect();
                let b = if rng.gen_bool(0.2) {
                    rng.gen_range(0..100).to_string()
                } else {
                    same[rng.gen_range(0..same.len())].0.clone()
                };
                let op = BIN[rng.gen_range(0..BIN.len())];
                ints.push((name.clone(), ty));
                format!("{name} = {op} {ty} {a}, {b}")
            }
            2 => {
                let (a, ty) = pick(rng, &ints);
                let op = if rng.gen_bool(0.5) { "neg" } else { "not" };
                ints.push((name.clone(), ty));
                format!("{name} = {op} {ty} {a}")
            }
            3 => {
                let (a, _) = pick(rng, &ints);
                let to = INT[rng.gen_range(0..3)];
                ints.push((name.clone(), to));
                format!("{name} = cast {to} {a}")
            }
            4 => {
                let (a, ty) = pick(rng, &ints);
                let same: Vec<_> = ints.iter().filter(|(_, t)| *t == ty).collect();
                let b = same[rng.gen_range(0..same.len())].0.clone();
                ints.push((name.clone(), "u8"));
                format!("{name} = icmp.lt {ty} {a}, {b}")
            }
            5 | 6 => {
                let base = ptrs[rng.gen_range(0..ptrs.len())].clone();
                let idx: Vec<String> = (0..rng.gen_range(1..=3))
                    .map(|_| {
                        let i = if rng.gen_bool(0.2) {
                            rng.gen_range(0..8).to_string()
                        } else {
                            pick(rng, &ints).0
                        };
                        format!("{i}:{}", [1, 4, 8][rng.gen_range(0..3)])
                    })
                    .collect();
                ptrs.push(name.clone());
                format!("{name} = gep {base}, {}", idx.join(", "))
            }
            7 => {
                let a = ptrs[rng.gen_range(0..ptrs.len())].clone();
                let ty = INT[rng.gen_range(0..3)];
                ints.push((name.clone(), ty));
                format!("{name} = load {ty} {a}")
            }
            8 => {
                let a = ptrs[rng.gen_range(0..ptrs.len())].clone();
                let (v, ty) = pick(rng, &ints);
                format!("store {ty} {a}, {v}")
            }
            _ => {
                let ty = INT[rng.gen_range(0..3)];
                ints.push((name.clone(), ty));
                if rng.gen_bool(0.5) {
                    format!("{name} = const {ty} {}", rng.gen_range(0..200))
                } else {
                    format!("{name} = input_read {ty} {}", rng.gen_range(0..4))
                }
            }
        };
        body.push_str("  ");
        body.push_str(&line);
        body.push('\n');
    }
    format!(
        "program entry=f seed=5\nfn @f(%x: u64, %y: u32, %z: u8, %w: u64, %p: ptr, %q: ptr) -> u8 {{\nentry:\n{body}  ret u8 %z\n}}\n"
    )
}

// ------------------------------------------------------- template enumeration

/// Every template instance that holds over all `rows` of one program point,
/// enumerated in batch over the raw values. Implied templates are left out
/// the same way the learner reports them: constants get only a
/// `ConstEqual`, `NonZero` only when the bounds straddle zero, equal pairs
/// only `EqVars`, and the linear fit only when it is neither trivial nor the
/// identity, preferring x→y over y→x.
#[allow(clippy::needless_range_loop)]
pub fn enumerate_templates(
    rows: &[Vec<i128>],
    dump: &[ValueId],
    comp: &ComparabilityMap,
) -> BTreeSet<(String, Vec<ValueId>)> {
    let mut out = BTreeSet::new();
    let col = |i: usize| rows.iter().map(move |r| r[i]);
    let distinct = |i: usize| col(i).collect::<BTreeSet<i128>>();
    let key = |k: &InvariantKind, vars: Vec<ValueId>| (format!("{k:?}"), vars);
    for i in 0..dump.len() {
        let d = distinct(i);
        let (lo, hi) = (*d.first().unwrap(), *d.last().unwrap());
        if d.len() == 1 {
            out.insert(key(&InvariantKind::ConstEqual(lo), vec![dump[i]]));
            continue;
        }
        if d.len() <= 3 {
            out.insert(key(&InvariantKind::OneOf(d.iter().copied().collect()), vec![dump[i]]));
        }
        out.insert(key(&InvariantKind::LowerBound(lo), vec![dump[i]]));
        out.insert(key(&InvariantKind::UpperBound(hi), vec![dump[i]]));
        if !d.contains(&0) && lo < 0 && hi > 0 {
            out.insert(key(&InvariantKind::NonZero, vec![dump[i]]));
        }
    }
    let fit = |xi: usize, yi: usize| -> Option<(i128, i128)> {
        let pts: Vec<(i128, i128)> = rows.iter().map(|r| (r[xi], r[yi])).collect();
        let (x1, y1) = pts[0];
        let &(x2, y2) = pts.iter().find(|(x, _)| *x != x1)?;
        if (y2 - y1) % (x2 - x1) != 0 {
            return None;
        }
        let a = (y2 - y1) / (x2 - x1);
        let b = y1 - a * x1;
        let lim = invscov_core::miner::LINEAR_COEFF_LIMIT;
        let ok = a.abs() <= lim && b.abs() <= lim && a != 0 && (a, b) != (1, 0);
        (ok && pts.iter().all(|&(x, y)| y == a * x + b)).then_some((a, b))
    };
    for i in 0..dump.len() {
        for j in i + 1..dump.len() {
            let eligible = match (comp.class(dump[i]), comp.class(dump[j])) {
                (Some(a), Some(b)) => a == b,
                (None, None) => false,
                _ => true,
            };
            if !eligible || distinct(i).len() == 1 || distinct(j).len() == 1 {
                continue;
            }
            let (x, y) = (dump[i], dump[j]);
            if rows.iter().all(|r| r[i] == r[j]) {
                out.insert(key(&InvariantKind::EqVars, vec![x, y]));
                continue;
            }
            if rows.iter().all(|r| r[i] <= r[j]) {
                out.insert(key(&InvariantKind::LeVars, vec![x, y]));
            }
            if rows.iter().all(|r| r[j] <= r[i]) {
                out.insert(key(&InvariantKind::LeVars, vec![y, x]));
            }
            if let Some((a, b)) = fit(i, j) {
                out.insert(key(&InvariantKind::Linear { a, b }, vec![x, y]));
            } else if let Some((a, b)) = fit(j, i) {
                out.insert(key(&InvariantKind::Linear { a, b }, vec![y, x]));
            }
        }
    }
    out
}

/// Emission block each check site should use: the outermost block on its
/// dominator chain holding the same invariant.
pub fn expected_emission(
    analysis: &ProgramAnalysis,
    sites: &BTreeSet<(FuncId, BlockId, String)>,
    f: FuncId,
    b: BlockId,
    key: &str,
) -> BlockId {
    let dom = &analysis.func(f).dom;
    dom.chain(b).filter(|d| sites.contains(&(f, *d, key.to_string()))).last().unwrap_or(b)
}
