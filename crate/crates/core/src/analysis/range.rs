//! Conservative value-range analysis.
//!
//! Every instruction is read as one constraint over its result:
//! constants `Y = [a, b]`, phis `Y = Merge(X1, X2)` (interval hull), sums,
//! products, affine forms `Y = a*X + b`, and intersections `Y = X ⊓ [a, b]`
//! contributed by `icmp`-against-literal branches that dominate the use.
//! The system is solved by ascending iteration with widening to the type's
//! bounds after three growths, followed by two narrowing passes. Anything that
//! may wrap falls back to the full range of its type.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::{
    build_cfg, dominator_tree, BinaryOp, BlockId, Cfg, DominatorTree, Function, IcmpPred,
    InstKind, Operand, ScalarType, TermKind, UnaryOp, ValueDef, ValueId,
};

/// Closed integer interval; `i128::MIN` / `i128::MAX` stand for −∞ / +∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i128,
    pub hi: i128,
}

pub const NEG_INF: i128 = i128::MIN;
pub const POS_INF: i128 = i128::MAX;

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |v: i128| match v {
            NEG_INF => "-inf".to_string(),
            POS_INF => "+inf".to_string(),
            v => v.to_string(),
        };
        write!(f, "[{}, {}]", end(self.lo), end(self.hi))
    }
}

#[allow(clippy::should_implement_trait)]
impl Interval {
    pub fn new(lo: i128, hi: i128) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(v: i128) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn full(ty: ScalarType) -> Self {
        Interval { lo: ty.min_value(), hi: ty.max_value() }
    }

    pub const TOP: Interval = Interval { lo: NEG_INF, hi: POS_INF };

    pub fn contains(&self, v: i128) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_within(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Interval hull (`Merge`).
    pub fn hull(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    /// Intersection (`⊓`); `None` when empty.
    pub fn meet(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn add(self, other: Interval) -> Interval {
        Interval { lo: sat_add(self.lo, other.lo), hi: sat_add(self.hi, other.hi) }
    }

    pub fn sub(self, other: Interval) -> Interval {
        self.add(other.neg())
    }

    pub fn neg(self) -> Interval {
        Interval { lo: sat_neg(self.hi), hi: sat_neg(self.lo) }
    }

    pub fn mul(self, other: Interval) -> Interval {
        let c = [
            sat_mul(self.lo, other.lo),
            sat_mul(self.lo, other.hi),
            sat_mul(self.hi, other.lo),
            sat_mul(self.hi, other.hi),
        ];
        Interval { lo: *c.iter().min().unwrap(), hi: *c.iter().max().unwrap() }
    }

    /// `a*X + b`.
    pub fn affine(self, a: i128, b: i128) -> Interval {
        self.mul(Interval::point(a)).add(Interval::point(b))
    }

    /// Keeps the interval if it fits `ty`, otherwise the value may have
    /// wrapped and anything in the type is possible.
    pub fn fit(self, ty: ScalarType) -> Interval {
        let full = Interval::full(ty);
        if self.is_within(&full) {
            self
        } else {
            full
        }
    }
}

fn sat_add(a: i128, b: i128) -> i128 {
    match (a, b) {
        (NEG_INF, _) | (_, NEG_INF) => NEG_INF,
        (POS_INF, _) | (_, POS_INF) => POS_INF,
        _ => a.saturating_add(b),
    }
}

fn sat_neg(a: i128) -> i128 {
    match a {
        NEG_INF => POS_INF,
        POS_INF => NEG_INF,
        _ => -a,
    }
}

fn sat_mul(a: i128, b: i128) -> i128 {
    a.saturating_mul(b)
}

/// Sound interval for every IR value of one function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeMap {
    ranges: Vec<Interval>,
}

impl RangeMap {
    pub fn get(&self, v: ValueId) -> Interval {
        self.ranges[v.index()]
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

const WIDEN_AFTER: u32 = 3;
const NARROWING_PASSES: usize = 2;

/// A `value ⊓ interval` fact that holds whenever some block executes.
type Refinement = (ValueId, Interval);

struct Solver<'f> {
    f: &'f Function,
    cfg: Cfg,
    /// Facts from dominating branch edges, per block.
    block_facts: Vec<Vec<Refinement>>,
    ranges: Vec<Option<Interval>>,
    growth: Vec<u32>,
}

pub fn compute_ranges(f: &Function) -> RangeMap {
    let cfg = build_cfg(f);
    let dom = dominator_tree(&cfg).expect("validated functions have no unreachable blocks");
    let block_facts = f.block_ids().map(|b| dominating_facts(f, &cfg, &dom, b)).collect();
    let mut solver = Solver {
        f,
        cfg,
        block_facts,
        ranges: vec![None; f.values.len()],
        growth: vec![0; f.values.len()],
    };
    for p in &f.params {
        solver.ranges[p.index()] = Some(Interval::full(f.value(*p).ty));
    }
    let rpo = solver.cfg.reverse_postorder();

    let mut changed = true;
    while changed {
        changed = false;
        for &b in &rpo {
            for inst in &f.block(b).instructions {
                let Some(r) = inst.result else { continue };
                let Some(new) = solver.transfer(b, &inst.kind) else { continue };
                changed |= solver.widen_update(r, new);
            }
        }
    }
    for _ in 0..NARROWING_PASSES {
        for &b in &rpo {
            for inst in &f.block(b).instructions {
                let Some(r) = inst.result else { continue };
                if let Some(new) = solver.transfer(b, &inst.kind) {
                    if let Some(old) = solver.ranges[r.index()] {
                        solver.ranges[r.index()] = Some(new.meet(old).unwrap_or(old));
                    }
                }
            }
        }
    }

    let ranges = solver
        .ranges
        .iter()
        .zip(&f.values)
        .map(|(r, v)| r.unwrap_or(Interval::full(v.ty)))
        .collect();
    RangeMap { ranges }
}

impl Solver<'_> {
    fn widen_update(&mut self, v: ValueId, new: Interval) -> bool {
        let ty = self.f.value(v).ty;
        let slot = &mut self.ranges[v.index()];
        match *slot {
            None => {
                *slot = Some(new);
                true
            }
            Some(old) => {
                let joined = old.hull(new);
                if joined == old {
                    return false;
                }
                self.growth[v.index()] += 1;
                *slot = Some(if self.growth[v.index()] > WIDEN_AFTER {
                    Interval::full(ty)
                } else {
                    joined
                });
                true
            }
        }
    }

    /// Range of `op` as seen inside `block` (after refinement), plus any
    /// extra facts (edge conditions for phi operands).
    fn operand_in(&self, op: Operand, block: BlockId, extra: &[Refinement]) -> Option<Interval> {
        match op {
            Operand::Const(c) => Some(Interval::point(c)),
            Operand::Value(v) => {
                let mut r = self.ranges[v.index()]?;
                for (fv, iv) in self.block_facts[block.index()].iter().chain(extra) {
                    if *fv == v {
                        r = r.meet(*iv)?;
                    }
                }
                Some(r)
            }
        }
    }

    fn transfer(&self, b: BlockId, kind: &InstKind) -> Option<Interval> {
        let op = |o: Operand| self.operand_in(o, b, &[]);
        Some(match kind {
            InstKind::Const { value, .. } => Interval::point(*value),
            InstKind::Binary { op: bop, ty, lhs, rhs } => binary(*bop, *ty, op(*lhs)?, op(*rhs)?),
            InstKind::Unary { op: uop, ty, arg } => {
                let a = op(*arg)?;
                match uop {
                    UnaryOp::Neg => a.neg().fit(*ty),
                    UnaryOp::Not if ty.is_signed() => a.neg().add(Interval::point(-1)).fit(*ty),
                    UnaryOp::Not => Interval::point(ty.max_value()).sub(a).fit(*ty),
                }
            }
            InstKind::Cast { to, arg } => op(*arg)?.fit(*to),
            InstKind::Icmp { .. } => Interval::new(0, 1),
            InstKind::Phi { incoming, .. } => {
                let mut acc: Option<Interval> = None;
                for (o, pred) in incoming {
                    let edge = edge_facts(self.f, *pred, b);
                    if let Some(r) = self.operand_in(*o, *pred, &edge) {
                        acc = Some(acc.map_or(r, |a| a.hull(r)));
                    }
                }
                acc?
            }
            InstKind::Load { ty, .. } | InstKind::Call { ty, .. } => Interval::full(*ty),
            InstKind::Store { .. } => return None,
            InstKind::Gep { base, indices } => {
                let mut a = op(*base)?;
                for g in indices {
                    a = a.add(op(g.index)?.mul(Interval::point(g.stride as i128)));
                }
                a.fit(ScalarType::Ptr)
            }
            InstKind::InputRead { ty, .. } => Interval::new(0, 255).fit(*ty),
            InstKind::InputLen { ty } => {
                if ty.is_signed() && ty.bits() < 64 {
                    Interval::full(*ty)
                } else {
                    Interval::new(0, ty.max_value())
                }
            }
        })
    }
}

fn binary(op: BinaryOp, ty: ScalarType, a: Interval, b: Interval) -> Interval {
    let full = Interval::full(ty);
    match op {
        BinaryOp::Add => a.add(b).fit(ty),
        BinaryOp::Sub => a.sub(b).fit(ty),
        BinaryOp::Mul => a.mul(b).fit(ty),
        BinaryOp::Div => {
            if b.contains(0) {
                // Only the non-faulting executions produce a value: |a/b| <= |a|.
                let m = a.lo.unsigned_abs().max(a.hi.unsigned_abs()) as i128;
                Interval::new(-m, m).meet(full).unwrap_or(full)
            } else {
                let c = [a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi];
                Interval::new(*c.iter().min().unwrap(), *c.iter().max().unwrap()).fit(ty)
            }
        }
        BinaryOp::Rem => {
            let m = b.lo.unsigned_abs().max(b.hi.unsigned_abs()) as i128;
            if m == 0 {
                return Interval::point(0);
            }
            let lo = if a.lo < 0 { a.lo.max(-(m - 1)) } else { 0 };
            let hi = if a.hi > 0 { a.hi.min(m - 1) } else { 0 };
            Interval::new(lo, hi)
        }
        BinaryOp::And => match (a.lo >= 0, b.lo >= 0) {
            (true, true) => Interval::new(0, a.hi.min(b.hi)),
            (true, false) => Interval::new(0, a.hi),
            (false, true) => Interval::new(0, b.hi),
            (false, false) => full,
        },
        BinaryOp::Or | BinaryOp::Xor => {
            if a.lo >= 0 && b.lo >= 0 {
                let m = a.hi.max(b.hi);
                let cap = if m == 0 { 0 } else { (1i128 << (128 - m.leading_zeros())) - 1 };
                let lo = if op == BinaryOp::Or { a.lo.max(b.lo) } else { 0 };
                Interval::new(lo, cap).fit(ty)
            } else {
                full
            }
        }
        BinaryOp::Shl => {
            if b.is_point() {
                let k = b.lo.rem_euclid(ty.bits() as i128) as u32;
                a.mul(Interval::point(1i128 << k)).fit(ty)
            } else {
                full
            }
        }
        BinaryOp::Shr => {
            if b.is_point() {
                let k = b.lo.rem_euclid(ty.bits() as i128) as u32;
                Interval::new(a.lo >> k, a.hi >> k)
            } else if a.lo >= 0 {
                Interval::new(0, a.hi)
            } else {
                full
            }
        }
    }
}

/// The fact a branch outcome establishes about a compared value, if the
/// comparison is against a literal (or a `const`-defined value).
fn condition_fact(f: &Function, cond: Operand, taken: bool) -> Option<Refinement> {
    let Operand::Value(c) = cond else { return None };
    let ValueDef::Inst { block, index } = f.value(c).def else { return None };
    let InstKind::Icmp { pred, lhs, rhs, .. } = f.block(block).instructions[index].kind else {
        return None;
    };
    let literal = |o: Operand| match o {
        Operand::Const(k) => Some(k),
        Operand::Value(v) => match f.value(v).def {
            ValueDef::Inst { block, index } => match f.block(block).instructions[index].kind {
                InstKind::Const { value, .. } => Some(value),
                _ => None,
            },
            ValueDef::Param(_) => None,
        },
    };
    // Normalize to `x pred k` or `k pred x`.
    let (x, k, x_left) = match (lhs, literal(lhs), rhs, literal(rhs)) {
        (Operand::Value(x), None, _, Some(k)) => (x, k, true),
        (_, Some(k), Operand::Value(x), None) => (x, k, false),
        _ => return None,
    };
    let at_most = |k: i128| Interval::new(NEG_INF, k);
    let at_least = |k: i128| Interval::new(k, POS_INF);
    let iv = match (pred, taken, x_left) {
        (IcmpPred::Lt, true, true) => at_most(k - 1),
        (IcmpPred::Lt, false, true) => at_least(k),
        (IcmpPred::Le, true, true) => at_most(k),
        (IcmpPred::Le, false, true) => at_least(k + 1),
        (IcmpPred::Lt, true, false) => at_least(k + 1),
        (IcmpPred::Lt, false, false) => at_most(k),
        (IcmpPred::Le, true, false) => at_least(k),
        (IcmpPred::Le, false, false) => at_most(k - 1),
        (IcmpPred::Eq, true, _) | (IcmpPred::Ne, false, _) => Interval::point(k),
        (IcmpPred::Eq, false, _) | (IcmpPred::Ne, true, _) => return None,
    };
    Some((x, iv))
}

/// Facts that hold on the edge `from -> to`.
fn edge_facts(f: &Function, from: BlockId, to: BlockId) -> Vec<Refinement> {
    match f.block(from).terminator.kind {
        TermKind::Br { cond, then_, else_ } if then_ != else_ => {
            condition_fact(f, cond, to == then_).into_iter().collect()
        }
        _ => Vec::new(),
    }
}

/// Facts from every dominating block that is entered through a unique
/// conditional edge. Within one activation the compared value cannot change
/// between that edge and `b`.
fn dominating_facts(f: &Function, cfg: &Cfg, dom: &DominatorTree, b: BlockId) -> Vec<Refinement> {
    let mut facts = Vec::new();
    for e in dom.chain(b) {
        if let [p] = cfg.preds(e) {
            facts.extend(edge_facts(f, *p, e));
        }
    }
    facts
}
