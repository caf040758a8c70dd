//! Edge-coverage map with invariant-violation perturbation.
//!
//! At block entry the edge `cur ^ prev` is counted and `prev` becomes
//! `cur >> 1`. At block exit each check of the block XORs its outcome
//! (`0` when the invariant holds, `id << 1` otherwise) into `prev`, so a
//! violation moves the *outgoing* edge to a different map index.

use crate::interp::{BlockExit, Hooks};
use crate::ir::{BlockId, FuncId, Program, ValueId};
use crate::miner::{InvariantKind, InvariantSetReport, MAX_INVARIANT_ID};

pub const MAP_SIZE: usize = 1 << 16;
/// Number of non-empty hit-count buckets.
pub const BUCKETS: usize = 8;

/// 64 Ki saturating hit counters plus the list of indices touched since the
/// last reset, so clearing and scanning cost only what was used.
#[derive(Clone)]
pub struct CoverageMap {
    counts: Box<[u8]>,
    touched: Vec<u16>,
}

impl Default for CoverageMap {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for CoverageMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoverageMap").field("touched", &self.touched.len()).finish()
    }
}

impl PartialEq for CoverageMap {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts
    }
}

impl Eq for CoverageMap {}

impl CoverageMap {
    pub fn new() -> Self {
        CoverageMap { counts: vec![0u8; MAP_SIZE].into_boxed_slice(), touched: Vec::new() }
    }

    pub fn reset(&mut self) {
        for &i in &self.touched {
            self.counts[i as usize] = 0;
        }
        self.touched.clear();
    }

    #[inline]
    pub fn bump(&mut self, index: u16) {
        let c = &mut self.counts[index as usize];
        if *c == 0 {
            self.touched.push(index);
        }
        *c = c.saturating_add(1);
    }

    #[inline]
    pub fn get(&self, index: u16) -> u8 {
        self.counts[index as usize]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.counts
    }

    /// Non-zero indices, in first-hit order.
    pub fn touched(&self) -> &[u16] {
        &self.touched
    }

    /// `(index, bucket bit)` pairs of this execution, sorted.
    pub fn features(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .touched
            .iter()
            .map(|&i| feature(i, bucket_bit(self.counts[i as usize])))
            .collect();
        v.sort_unstable();
        v
    }
}

/// Packs an index and a single bucket bit into one sortable key.
#[inline]
pub fn feature(index: u16, bit: u8) -> u32 {
    (index as u32) << 3 | bit.trailing_zeros()
}

/// Hit-count bucket: 0 for `{0}`, then `{1}`, `{2}`, `{3}`, `{4..7}`,
/// `{8..15}`, `{16..31}`, `{32..127}`, `{128..255}` as 1..=8.
#[inline]
pub fn bucket(hits: u8) -> u8 {
    match hits {
        0 => 0,
        1 => 1,
        2 => 2,
        3 => 3,
        4..=7 => 4,
        8..=15 => 5,
        16..=31 => 6,
        32..=127 => 7,
        128..=255 => 8,
    }
}

/// Bucket as a one-hot bit (0 for no hits).
#[inline]
pub fn bucket_bit(hits: u8) -> u8 {
    match bucket(hits) {
        0 => 0,
        b => 1 << (b - 1),
    }
}

/// Instrumentation register carried along one execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FeedbackState {
    pub prev_loc: u16,
}

impl FeedbackState {
    pub fn reset(&mut self) {
        self.prev_loc = 0;
    }

    #[inline]
    pub fn log_edge(&mut self, map: &mut CoverageMap, cur_loc: u16) {
        map.bump(cur_loc ^ self.prev_loc);
        self.prev_loc = cur_loc >> 1;
    }

    #[inline]
    pub fn apply_outcome(&mut self, outcome: CheckOutcome) {
        self.prev_loc ^= outcome.0;
    }
}

/// `0` when the invariant holds, `id << 1` when it is violated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CheckOutcome(pub u16);

impl CheckOutcome {
    pub fn violated(self) -> bool {
        self.0 != 0
    }
}

#[inline]
pub fn apply_check(id: u32, kind: &InvariantKind, values: &[i128]) -> CheckOutcome {
    debug_assert!((1..=MAX_INVARIANT_ID).contains(&id));
    if kind.holds(values) {
        CheckOutcome(0)
    } else {
        CheckOutcome((id << 1) as u16)
    }
}

/// Summary of what an execution added to the campaign's coverage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Novelty {
    /// Map indices hit for the first time.
    pub new_indices: u32,
    /// New `(index, bucket)` pairs, including those at new indices.
    pub new_buckets: u32,
}

impl Novelty {
    pub fn is_interesting(&self) -> bool {
        self.new_buckets > 0
    }
}

/// Buckets seen so far at every index, as bitmasks.
#[derive(Clone, PartialEq, Eq)]
pub struct VirginMap {
    seen: Box<[u8]>,
    indices: usize,
    buckets: usize,
}

impl Default for VirginMap {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for VirginMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VirginMap")
            .field("indices", &self.indices)
            .field("buckets", &self.buckets)
            .finish()
    }
}

impl VirginMap {
    pub fn new() -> Self {
        VirginMap { seen: vec![0u8; MAP_SIZE].into_boxed_slice(), indices: 0, buckets: 0 }
    }

    /// Indices ever hit.
    pub fn indices_seen(&self) -> usize {
        self.indices
    }

    pub fn buckets_seen(&self) -> usize {
        self.buckets
    }

    /// Fraction of the map ever hit.
    pub fn density(&self) -> f64 {
        self.indices as f64 / MAP_SIZE as f64
    }

    /// Compares without absorbing.
    pub fn novelty(&self, map: &CoverageMap) -> Novelty {
        let mut n = Novelty::default();
        for &i in map.touched() {
            let bit = bucket_bit(map.get(i));
            let seen = self.seen[i as usize];
            if seen & bit == 0 {
                n.new_buckets += 1;
                if seen == 0 {
                    n.new_indices += 1;
                }
            }
        }
        n
    }

    /// Absorbs the map's buckets and reports what was new.
    pub fn is_interesting(&mut self, map: &CoverageMap) -> Novelty {
        let mut n = Novelty::default();
        for &i in map.touched() {
            let bit = bucket_bit(map.get(i));
            let seen = &mut self.seen[i as usize];
            if *seen & bit == 0 {
                n.new_buckets += 1;
                if *seen == 0 {
                    n.new_indices += 1;
                    self.indices += 1;
                }
                *seen |= bit;
                self.buckets += 1;
            }
        }
        n
    }
}

/// How dominated reuse sites get their outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Evaluate once at the emission site, reuse the cached outcome below.
    Dedup,
    /// Re-evaluate the predicate at every site.
    Local,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct PlannedCheck {
    id: u32,
    kind: InvariantKind,
    vars: [ValueId; 2],
    arity: u8,
    /// `Some(slot)`: read the frame cache instead of evaluating.
    reuse: Option<u32>,
    /// `Some(slot)`: store the outcome for later reuse.
    store: Option<u32>,
}

/// Per-block check lists resolved against a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckPlan {
    /// `[function][block]`.
    blocks: Vec<Vec<Vec<PlannedCheck>>>,
    /// Cache slots per function.
    slots: Vec<u32>,
    checks: usize,
}

impl CheckPlan {
    /// No checks at all: plain edge coverage.
    pub fn empty(p: &Program) -> Self {
        CheckPlan {
            blocks: p.functions.iter().map(|f| vec![Vec::new(); f.blocks.len()]).collect(),
            slots: vec![0; p.functions.len()],
            checks: 0,
        }
    }

    pub fn new(p: &Program, report: &InvariantSetReport, mode: CheckMode) -> Self {
        let mut plan = CheckPlan::empty(p);
        // Cache slot per emitted invariant that has reuse sites.
        let mut slot_of = vec![None; report.invariants.len() + 1];
        if mode == CheckMode::Dedup {
            for s in &report.sites {
                let inv = report.get(s.id);
                if inv.block != s.block && slot_of[s.id as usize].is_none() {
                    let fi = inv.function.index();
                    slot_of[s.id as usize] = Some(plan.slots[fi]);
                    plan.slots[fi] += 1;
                }
            }
        }
        for s in &report.sites {
            let inv = report.get(s.id);
            let at_emission = inv.block == s.block;
            let slot = slot_of[s.id as usize];
            let vars = [inv.vars[0], *inv.vars.get(1).unwrap_or(&inv.vars[0])];
            plan.blocks[s.function.index()][s.block.index()].push(PlannedCheck {
                id: s.id,
                kind: inv.kind.clone(),
                vars,
                arity: inv.vars.len() as u8,
                reuse: if at_emission { None } else { slot },
                store: if at_emission { slot } else { None },
            });
            plan.checks += 1;
        }
        plan
    }

    pub fn is_empty(&self) -> bool {
        self.checks == 0
    }

    /// Total number of check sites.
    pub fn len(&self) -> usize {
        self.checks
    }
}

/// Interpreter hooks that fill a [`CoverageMap`] for one execution.
pub struct CoverageHooks<'a> {
    pub map: &'a mut CoverageMap,
    pub state: FeedbackState,
    plan: &'a CheckPlan,
    frames: Vec<Vec<u16>>,
    pool: Vec<Vec<u16>>,
    /// Outcomes of every evaluated or reused check, in order; only filled
    /// when `record_outcomes` is set.
    pub outcomes: Vec<(FuncId, BlockId, u32, CheckOutcome)>,
    pub record_outcomes: bool,
}

impl<'a> CoverageHooks<'a> {
    /// Clears `map` and starts a fresh execution.
    pub fn new(map: &'a mut CoverageMap, plan: &'a CheckPlan, entry: FuncId) -> Self {
        map.reset();
        let mut h = CoverageHooks {
            map,
            state: FeedbackState::default(),
            plan,
            frames: Vec::new(),
            pool: Vec::new(),
            outcomes: Vec::new(),
            record_outcomes: false,
        };
        h.push_frame(entry);
        h
    }

    fn push_frame(&mut self, f: FuncId) {
        let n = self.plan.slots.get(f.index()).copied().unwrap_or(0) as usize;
        let mut buf = self.pool.pop().unwrap_or_default();
        buf.clear();
        buf.resize(n, 0);
        self.frames.push(buf);
    }
}

impl Hooks for CoverageHooks<'_> {
    #[inline]
    fn block_enter(&mut self, p: &Program, f: FuncId, b: BlockId) {
        let loc = p.func(f).block(b).loc;
        self.state.log_edge(self.map, loc);
    }

    #[inline]
    fn block_exit(&mut self, exit: &BlockExit<'_>) {
        let checks = &self.plan.blocks[exit.function.index()][exit.block.index()];
        if checks.is_empty() {
            return;
        }
        let frame = self.frames.last_mut().expect("frame stack");
        for c in checks {
            let outcome = match c.reuse {
                Some(slot) => CheckOutcome(frame[slot as usize]),
                None => {
                    let vals = [exit.value(c.vars[0]), exit.value(c.vars[1])];
                    let o = apply_check(c.id, &c.kind, &vals[..c.arity as usize]);
                    if let Some(slot) = c.store {
                        frame[slot as usize] = o.0;
                    }
                    o
                }
            };
            self.state.apply_outcome(outcome);
            if self.record_outcomes {
                self.outcomes.push((exit.function, exit.block, c.id, outcome));
            }
        }
    }

    fn call(&mut self, callee: FuncId) {
        self.push_frame(callee);
    }

    fn ret(&mut self) {
        if let Some(buf) = self.frames.pop() {
            self.pool.push(buf);
        }
    }
}
