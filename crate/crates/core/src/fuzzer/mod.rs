//! Evolutionary fuzzing: pick an entry, decide how long to work on it, then
//! mutate and evaluate until the execution budget is spent.

mod corpus;
mod crash;
mod mutate;
mod output;

pub use corpus::{
    calibrate, greedy_cover, Corpus, CorpusEntry, EntryMeta, FAVORED_RECOMPUTE_EVERY,
    SKIP_NON_FAVORED,
};
pub use crash::{CrashRecord, CrashSet};
pub use mutate::{apply_op, mutate, MutationOp, DEFAULT_MAX_INPUT_LEN, INTERESTING_BYTES};
pub use output::{entry_file_name, read_corpus_dir, write_campaign, CampaignFiles};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feedback::{CheckPlan, CoverageHooks, CoverageMap, VirginMap};
use crate::interp::{Fault, Interpreter, Limits, Outcome};
use crate::ir::Program;

pub const DEFAULT_STATS_WINDOW: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    /// Executions, seeds included.
    pub budget: u64,
    pub rng_seed: u64,
    pub limits: Limits,
    pub max_input_len: usize,
    /// Executions per stats record.
    pub stats_window: u64,
    /// Stop as soon as the first crash is found.
    pub stop_on_crash: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            budget: 10_000,
            rng_seed: 0,
            limits: Limits::default(),
            max_input_len: DEFAULT_MAX_INPUT_LEN,
            stats_window: DEFAULT_STATS_WINDOW,
            stop_on_crash: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FuzzError {
    #[error("execution budget must be positive")]
    ZeroBudget,
    #[error("seed corpus is empty")]
    NoSeeds,
    #[error("stats window must be positive")]
    ZeroWindow,
}

/// Totals at the end of a stats window. Contains only values that depend on
/// the campaign's inputs, never on wall-clock time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub execs: u64,
    pub corpus_size: usize,
    pub favored: usize,
    pub map_indices: usize,
    pub map_buckets: usize,
    pub map_density: f64,
    pub faults: u64,
    pub unique_bugs: usize,
    pub timeouts: u64,
    pub steps: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub total: StatsRecord,
    pub series: Vec<StatsRecord>,
    /// Execution count at which the first crash was found.
    pub first_crash_at: Option<u64>,
}

/// Wall-clock measurements; kept apart from [`CampaignStats`] so that the
/// latter is reproducible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_secs: f64,
    pub execs_per_sec: f64,
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub corpus: Corpus,
    pub crashes: CrashSet,
    pub stats: CampaignStats,
    pub timing: Timing,
    /// Every fault observed, in order; kept only if requested.
    pub fault_log: Vec<Fault>,
}

/// Mutable campaign state shared by the seeding phase and the main loop.
pub struct Campaign<'p> {
    program: &'p Program,
    plan: &'p CheckPlan,
    config: FuzzConfig,
    interp: Interpreter<'p>,
    map: CoverageMap,
    pub virgin: VirginMap,
    pub corpus: Corpus,
    pub crashes: CrashSet,
    pub stats: CampaignStats,
    pub fault_log: Option<Vec<Fault>>,
    rng: ChaCha8Rng,
}

/// What one evaluation did to the campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    NewCrash(u64),
    KnownCrash(u64),
    Timeout,
    Added,
    Boring,
}

impl<'p> Campaign<'p> {
    pub fn new(program: &'p Program, plan: &'p CheckPlan, config: FuzzConfig) -> Self {
        Campaign {
            program,
            plan,
            config,
            interp: Interpreter::new(program, config.limits),
            map: CoverageMap::new(),
            virgin: VirginMap::new(),
            corpus: Corpus::new(),
            crashes: CrashSet::new(),
            stats: CampaignStats::default(),
            fault_log: None,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
        }
    }

    pub fn execs(&self) -> u64 {
        self.stats.total.execs
    }

    pub fn done(&self) -> bool {
        self.execs() >= self.config.budget
            || (self.config.stop_on_crash && !self.crashes.is_empty())
    }

    /// The coverage map of the last evaluated input.
    pub fn last_map(&self) -> &CoverageMap {
        &self.map
    }

    /// Runs `input`, triages faults by call-stack hash and keeps the input if
    /// it shows new coverage. Time-outs are neither.
    pub fn evaluate(&mut self, input: &[u8]) -> Evaluation {
        let mut hooks = CoverageHooks::new(&mut self.map, self.plan, self.program.entry);
        let result = self.interp.run_entry(input, &mut hooks);
        let t = &mut self.stats.total;
        t.execs += 1;
        t.steps += result.steps;
        let exec = t.execs;
        let ev = match result.outcome {
            Outcome::Fault(fault) => {
                t.faults += 1;
                let hash = fault.callstack_hash();
                let new = self.crashes.insert(&fault, input, exec);
                if let Some(log) = &mut self.fault_log {
                    log.push(fault);
                }
                if new {
                    self.stats.first_crash_at.get_or_insert(exec);
                    Evaluation::NewCrash(hash)
                } else {
                    Evaluation::KnownCrash(hash)
                }
            }
            Outcome::BudgetExhausted => {
                t.timeouts += 1;
                Evaluation::Timeout
            }
            Outcome::Ok { .. } => {
                let novelty = self.virgin.is_interesting(&self.map);
                if novelty.is_interesting() {
                    self.corpus.add(CorpusEntry {
                        input: input.to_vec(),
                        steps: result.steps,
                        novelty,
                        features: self.map.features(),
                        found_at: exec,
                        favored: true,
                    });
                    Evaluation::Added
                } else {
                    Evaluation::Boring
                }
            }
        };
        self.refresh_totals();
        if exec.is_multiple_of(self.config.stats_window) {
            self.stats.total.favored = self.corpus.favored_count();
            self.stats.series.push(self.stats.total);
        }
        ev
    }

    fn refresh_totals(&mut self) {
        let t = &mut self.stats.total;
        t.corpus_size = self.corpus.len();
        t.unique_bugs = self.crashes.len();
        t.map_indices = self.virgin.indices_seen();
        t.map_buckets = self.virgin.buckets_seen();
        t.map_density = self.virgin.density();
    }

    /// One round of the main loop: pick, calibrate, mutate and evaluate.
    pub fn round(&mut self, seeds: &[Vec<u8>]) {
        // With every seed crashing there is no corpus yet; mutate the seeds.
        let (base, n) = if self.corpus.is_empty() {
            let i = self.rng.gen_range(0..seeds.len());
            (seeds[i].clone(), 16)
        } else {
            let i = self.corpus.pick(&mut self.rng);
            (self.corpus.get(i).input.clone(), self.corpus.calibrate(i))
        };
        for _ in 0..n {
            if self.done() {
                return;
            }
            let partner = if self.corpus.len() > 1 {
                let j = self.rng.gen_range(0..self.corpus.len());
                Some(self.corpus.get(j).input.clone())
            } else {
                None
            };
            let input = mutate(&base, partner.as_deref(), self.config.max_input_len, &mut self.rng);
            self.evaluate(&input);
        }
    }

    pub fn finish(mut self, elapsed_secs: f64) -> CampaignResult {
        self.refresh_totals();
        self.stats.total.favored = self.corpus.favored_count();
        match self.stats.series.last_mut() {
            Some(last) if last.execs == self.stats.total.execs => *last = self.stats.total,
            _ => self.stats.series.push(self.stats.total),
        }
        let execs = self.stats.total.execs;
        CampaignResult {
            corpus: self.corpus,
            crashes: self.crashes,
            stats: self.stats,
            timing: Timing {
                elapsed_secs,
                execs_per_sec: if elapsed_secs > 0.0 { execs as f64 / elapsed_secs } else { 0.0 },
            },
            fault_log: self.fault_log.unwrap_or_default(),
        }
    }
}

/// Runs a whole campaign. With an empty [`CheckPlan`] this is plain
/// edge-coverage fuzzing.
pub fn fuzz_loop(
    program: &Program,
    seeds: &[Vec<u8>],
    plan: &CheckPlan,
    config: FuzzConfig,
) -> Result<CampaignResult, FuzzError> {
    fuzz_loop_with(program, seeds, plan, config, false)
}

/// [`fuzz_loop`], optionally logging every fault.
pub fn fuzz_loop_with(
    program: &Program,
    seeds: &[Vec<u8>],
    plan: &CheckPlan,
    config: FuzzConfig,
    log_faults: bool,
) -> Result<CampaignResult, FuzzError> {
    if config.budget == 0 {
        return Err(FuzzError::ZeroBudget);
    }
    if config.stats_window == 0 {
        return Err(FuzzError::ZeroWindow);
    }
    if seeds.is_empty() {
        return Err(FuzzError::NoSeeds);
    }
    let start = Instant::now();
    let mut c = Campaign::new(program, plan, config);
    if log_faults {
        c.fault_log = Some(Vec::new());
    }
    for s in seeds {
        if c.done() {
            break;
        }
        let mut s = s.clone();
        s.truncate(config.max_input_len);
        c.evaluate(&s);
    }
    c.corpus.recompute_favored();
    while !c.done() {
        c.round(seeds);
    }
    Ok(c.finish(start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    const CRASHY: &str = "program entry=main seed=1\nfn @main() -> u8 {\nentry:\n  bug\n}\n";

    const BRANCHY: &str = "program entry=main seed=3
fn @main() -> u8 {
entry:
  %n = input_len u32
  %e = icmp.eq u32 %n, 0
  br %e, empty, some
empty:
  ret u8 0
some:
  %b = input_read u8 0
  %c = icmp.eq u8 %b, 0x41
  br %c, a, other
a:
  %d = icmp.lt u32 %n, 2
  br %d, short, long
short:
  ret u8 1
long:
  %b1 = input_read u8 1
  %z = icmp.eq u8 %b1, 0x42
  br %z, boom, fine
boom:
  bug
fine:
  ret u8 2
other:
  ret u8 3
}
";

    #[test]
    fn crash_on_first_execution() {
        let p = parse_program(CRASHY).unwrap();
        let plan = CheckPlan::empty(&p);
        let cfg = FuzzConfig { budget: 10, ..FuzzConfig::default() };
        let r = fuzz_loop(&p, &[vec![]], &plan, cfg).unwrap();
        assert_eq!(r.crashes.len(), 1);
        assert_eq!(r.stats.first_crash_at, Some(1));
        assert_eq!(r.stats.total.execs, 10);
        assert_eq!(r.stats.total.faults, 10);
    }

    #[test]
    fn zero_budget_rejected() {
        let p = parse_program(CRASHY).unwrap();
        let plan = CheckPlan::empty(&p);
        let cfg = FuzzConfig { budget: 0, ..FuzzConfig::default() };
        assert_eq!(fuzz_loop(&p, &[vec![]], &plan, cfg).unwrap_err(), FuzzError::ZeroBudget);
        let cfg = FuzzConfig::default();
        assert_eq!(fuzz_loop(&p, &[], &plan, cfg).unwrap_err(), FuzzError::NoSeeds);
    }

    #[test]
    fn finds_two_byte_magic_and_is_deterministic() {
        let p = parse_program(BRANCHY).unwrap();
        let plan = CheckPlan::empty(&p);
        let cfg = FuzzConfig { budget: 30_000, rng_seed: 5, ..FuzzConfig::default() };
        let a = fuzz_loop(&p, &[vec![]], &plan, cfg).unwrap();
        let b = fuzz_loop(&p, &[vec![]], &plan, cfg).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.crashes, b.crashes);
        assert_eq!(a.corpus.entries(), b.corpus.entries());
        assert_eq!(a.crashes.len(), 1);
        let totals: Vec<u64> = a.stats.series.iter().map(|s| s.execs).collect();
        assert!(totals.windows(2).all(|w| w[0] < w[1]));
    }
}
