use std::collections::BTreeMap;

use super::invariant::{Invariant, InvariantKind, LINEAR_COEFF_LIMIT};
use super::trace::BlockStateRecord;
use crate::analysis::{ComparabilityMap, ProgramAnalysis};
use crate::ir::{BlockId, FuncId, Program, ValueId};

pub const DEFAULT_MIN_SAMPLES: u64 = 5;
pub const DEFAULT_MAX_PER_BLOCK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LearnConfig {
    /// Program points observed fewer times get no invariants.
    pub min_samples: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig { min_samples: DEFAULT_MIN_SAMPLES }
    }
}

/// Binary templates relate two values only when their classes agree or
/// exactly one of them is unclassified.
pub fn pair_eligible(comp: &ComparabilityMap, a: ValueId, b: ValueId) -> bool {
    match (comp.class(a), comp.class(b)) {
        (Some(x), Some(y)) => x == y,
        (None, None) => false,
        _ => true,
    }
}

#[derive(Clone, Debug)]
struct VarState {
    min: i128,
    max: i128,
    /// First four distinct values; a fourth means "more than three".
    distinct: Vec<i128>,
    nonzero: bool,
}

impl VarState {
    fn new(v: i128) -> Self {
        VarState { min: v, max: v, distinct: vec![v], nonzero: v != 0 }
    }

    fn observe(&mut self, v: i128) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
        if self.distinct.len() < 4 && !self.distinct.contains(&v) {
            self.distinct.push(v);
        }
        self.nonzero &= v != 0;
    }

    fn is_const(&self) -> bool {
        self.distinct.len() == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Linear {
    One(i128, i128),
    Fit(i128, i128),
    Dead,
}

impl Linear {
    fn observe(self, x: i128, y: i128) -> Linear {
        match self {
            Linear::One(x1, y1) if x == x1 => {
                if y == y1 {
                    self
                } else {
                    Linear::Dead
                }
            }
            Linear::One(x1, y1) => {
                let (dx, dy) = (x - x1, y - y1);
                if dy % dx != 0 {
                    return Linear::Dead;
                }
                let a = dy / dx;
                let b = y1 - a * x1;
                if a.abs() > LINEAR_COEFF_LIMIT || b.abs() > LINEAR_COEFF_LIMIT {
                    Linear::Dead
                } else {
                    Linear::Fit(a, b)
                }
            }
            Linear::Fit(a, b) if y == a * x + b => self,
            Linear::Fit(..) | Linear::Dead => Linear::Dead,
        }
    }

    fn usable(self) -> Option<(i128, i128)> {
        match self {
            Linear::Fit(a, b) if a != 0 && (a, b) != (1, 0) => Some((a, b)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct PairState {
    i: usize,
    j: usize,
    eq: bool,
    le_ij: bool,
    le_ji: bool,
    lin_ij: Linear,
    lin_ji: Linear,
}

#[derive(Clone, Debug)]
struct PptState {
    samples: u64,
    vars: Vec<VarState>,
    pairs: Vec<PairState>,
}

/// Single-pass learner; feed records in nonce order, then [`Learner::finish`].
pub struct Learner<'a> {
    analysis: &'a ProgramAnalysis,
    config: LearnConfig,
    ppts: BTreeMap<(FuncId, BlockId), PptState>,
}

impl<'a> Learner<'a> {
    pub fn new(analysis: &'a ProgramAnalysis, config: LearnConfig) -> Self {
        Learner { analysis, config, ppts: BTreeMap::new() }
    }

    pub fn observe(&mut self, rec: &BlockStateRecord) {
        let vals = &rec.values;
        match self.ppts.get_mut(&(rec.function, rec.block)) {
            Some(st) => {
                st.samples += 1;
                for (s, &v) in st.vars.iter_mut().zip(vals) {
                    s.observe(v);
                }
                for p in &mut st.pairs {
                    let (x, y) = (vals[p.i], vals[p.j]);
                    p.eq &= x == y;
                    p.le_ij &= x <= y;
                    p.le_ji &= y <= x;
                    p.lin_ij = p.lin_ij.observe(x, y);
                    p.lin_ji = p.lin_ji.observe(y, x);
                }
            }
            None => {
                let fa = self.analysis.func(rec.function);
                let dump = fa.dump.block(rec.block);
                let mut pairs = Vec::new();
                for i in 0..dump.len() {
                    for j in i + 1..dump.len() {
                        if pair_eligible(&fa.comparability, dump[i], dump[j]) {
                            let (x, y) = (vals[i], vals[j]);
                            pairs.push(PairState {
                                i,
                                j,
                                eq: x == y,
                                le_ij: x <= y,
                                le_ji: y <= x,
                                lin_ij: Linear::One(x, y),
                                lin_ji: Linear::One(y, x),
                            });
                        }
                    }
                }
                let st = PptState {
                    samples: 1,
                    vars: vals.iter().map(|&v| VarState::new(v)).collect(),
                    pairs,
                };
                self.ppts.insert((rec.function, rec.block), st);
            }
        }
    }

    /// Number of records seen at a program point.
    pub fn samples(&self, f: FuncId, b: BlockId) -> u64 {
        self.ppts.get(&(f, b)).map_or(0, |s| s.samples)
    }

    /// Surviving templates, ids dense from 1 in program-point order.
    ///
    /// Templates implied by another surviving one are not reported: a
    /// constant variable gets only `const-equal` and takes part in no binary
    /// relation, `non-zero` is dropped when the bounds exclude zero, and
    /// `le-vars` and `linear` are dropped when `eq-vars` holds.
    pub fn finish(self) -> Vec<Invariant> {
        let mut out = Vec::new();
        for (&(function, block), st) in &self.ppts {
            if st.samples < self.config.min_samples {
                continue;
            }
            let dump = self.analysis.func(function).dump.block(block);
            let mut push = |kind: InvariantKind, vars: Vec<ValueId>| {
                out.push(Invariant { id: 0, function, block, kind, vars, samples: st.samples })
            };
            for (i, s) in st.vars.iter().enumerate() {
                let v = vec![dump[i]];
                if s.is_const() {
                    push(InvariantKind::ConstEqual(s.distinct[0]), v);
                    continue;
                }
                if s.distinct.len() <= 3 {
                    let mut set = s.distinct.clone();
                    set.sort_unstable();
                    push(InvariantKind::OneOf(set), v.clone());
                }
                push(InvariantKind::LowerBound(s.min), v.clone());
                push(InvariantKind::UpperBound(s.max), v.clone());
                if s.nonzero && s.min < 0 && s.max > 0 {
                    push(InvariantKind::NonZero, v);
                }
            }
            for p in &st.pairs {
                if st.vars[p.i].is_const() || st.vars[p.j].is_const() {
                    continue;
                }
                let (x, y) = (dump[p.i], dump[p.j]);
                if p.eq {
                    push(InvariantKind::EqVars, vec![x, y]);
                    continue;
                }
                if p.le_ij {
                    push(InvariantKind::LeVars, vec![x, y]);
                }
                if p.le_ji {
                    push(InvariantKind::LeVars, vec![y, x]);
                }
                if let Some((a, b)) = p.lin_ij.usable() {
                    push(InvariantKind::Linear { a, b }, vec![x, y]);
                } else if let Some((a, b)) = p.lin_ji.usable() {
                    push(InvariantKind::Linear { a, b }, vec![y, x]);
                }
            }
        }
        for (i, inv) in out.iter_mut().enumerate() {
            inv.id = i as u32 + 1;
        }
        out
    }
}

/// Learns over a whole record stream.
pub fn learn_invariants<I>(records: I, analysis: &ProgramAnalysis, config: LearnConfig) -> Vec<Invariant>
where
    I: IntoIterator<Item = BlockStateRecord>,
{
    let mut l = Learner::new(analysis, config);
    for r in records {
        l.observe(&r);
    }
    l.finish()
}

/// Keeps at most `cap` invariants per program point, preferring binary ones,
/// then higher sample counts, then lower ids. Returns `(kept, dropped)`, each
/// in id order.
pub fn cap_per_block(invs: Vec<Invariant>, cap: usize) -> (Vec<Invariant>, Vec<Invariant>) {
    let mut by_ppt: BTreeMap<(FuncId, BlockId), Vec<Invariant>> = BTreeMap::new();
    for inv in invs {
        by_ppt.entry((inv.function, inv.block)).or_default().push(inv);
    }
    let (mut kept, mut dropped) = (Vec::new(), Vec::new());
    for (_, mut group) in by_ppt {
        group.sort_by_key(|i| (!i.kind.is_binary(), std::cmp::Reverse(i.samples), i.id));
        let rest = group.split_off(group.len().min(cap));
        kept.extend(group);
        dropped.extend(rest);
    }
    kept.sort_by_key(|i| i.id);
    dropped.sort_by_key(|i| i.id);
    (kept, dropped)
}

/// Convenience: names of a program's program points with their invariants.
pub fn group_by_ppt<'i>(
    p: &Program,
    invs: &'i [Invariant],
) -> BTreeMap<String, Vec<&'i Invariant>> {
    let mut m: BTreeMap<String, Vec<&Invariant>> = BTreeMap::new();
    for inv in invs {
        m.entry(p.func(inv.function).ppt_name(inv.block)).or_default().push(inv);
    }
    m
}
