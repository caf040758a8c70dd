//! End-to-end runs shared by the command line and the benchmarks: an
//! edge-coverage seed campaign, mining over its corpus, then a campaign in
//! the requested mode.

use serde::{Deserialize, Serialize};

use crate::analysis::ProgramAnalysis;
use crate::feedback::{CheckMode, CheckPlan};
use crate::fuzzer::{fuzz_loop, CampaignResult, CrashSet, FuzzConfig, FuzzError};
use crate::interp::Limits;
use crate::ir::Program;
use crate::miner::{finalize, learn_invariants, record_traces, LearnConfig, MiningOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    EdgeOnly,
    Invscov,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::EdgeOnly => "edge-only",
            Mode::Invscov => "invscov",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge-only" => Ok(Mode::EdgeOnly),
            "invscov" => Ok(Mode::Invscov),
            _ => Err(format!("unknown mode `{s}` (expected edge-only or invscov)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MineConfig {
    pub learn: LearnConfig,
    pub max_per_block: usize,
    pub limits: Limits,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            learn: LearnConfig::default(),
            max_per_block: crate::miner::DEFAULT_MAX_PER_BLOCK,
            limits: FuzzConfig::default().limits,
        }
    }
}

/// Learns, prunes, caps and deduplicates invariants over `corpus`.
pub fn mine(
    program: &Program,
    analysis: &ProgramAnalysis,
    corpus: &[Vec<u8>],
    config: &MineConfig,
) -> MiningOutcome {
    let records = record_traces(program, analysis, corpus, config.limits);
    let learned = learn_invariants(records, analysis, config.learn);
    finalize(learned, analysis, config.max_per_block)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialConfig {
    /// Executions of the edge-coverage seed campaign.
    pub seed_execs: u64,
    /// Total executions, seed campaign included.
    pub budget: u64,
    pub rng_seed: u64,
    pub fuzz: FuzzConfig,
    pub mine: MineConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            seed_execs: 20_000,
            budget: 200_000,
            rng_seed: 0,
            fuzz: FuzzConfig::default(),
            mine: MineConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub mode: Mode,
    pub seed: CampaignResult,
    pub main: CampaignResult,
    /// Check sites active in the main campaign.
    pub checks: usize,
}

impl TrialResult {
    /// Crashes of both phases.
    pub fn crashes(&self) -> CrashSet {
        let mut all = self.seed.crashes.clone();
        for c in self.main.crashes.iter() {
            all.absorb(c);
        }
        all
    }

    pub fn total_execs(&self) -> u64 {
        self.seed.stats.total.execs + self.main.stats.total.execs
    }
}

/// The seed campaign: edge coverage only, starting from the empty input.
pub fn seed_campaign(program: &Program, cfg: &TrialConfig) -> Result<CampaignResult, FuzzError> {
    let plan = CheckPlan::empty(program);
    let fuzz = FuzzConfig { budget: cfg.seed_execs, rng_seed: cfg.rng_seed, ..cfg.fuzz };
    fuzz_loop(program, &[Vec::new()], &plan, fuzz)
}

/// Seed campaign, then the rest of the budget in `mode` starting from the
/// seed corpus. Both modes share the seed phase for a given `rng_seed`.
pub fn run_trial(
    program: &Program,
    analysis: &ProgramAnalysis,
    mode: Mode,
    cfg: &TrialConfig,
) -> Result<TrialResult, FuzzError> {
    if cfg.budget <= cfg.seed_execs {
        return Err(FuzzError::ZeroBudget);
    }
    let seed = seed_campaign(program, cfg)?;
    let corpus: Vec<Vec<u8>> = seed.corpus.entries().iter().map(|e| e.input.clone()).collect();
    let corpus = if corpus.is_empty() { vec![Vec::new()] } else { corpus };
    let plan = match mode {
        Mode::EdgeOnly => CheckPlan::empty(program),
        Mode::Invscov => {
            let mined = mine(program, analysis, &corpus, &cfg.mine);
            CheckPlan::new(program, &mined.report, CheckMode::Dedup)
        }
    };
    let fuzz = FuzzConfig {
        budget: cfg.budget - cfg.seed_execs,
        rng_seed: cfg.rng_seed ^ 0x9e37_79b9_7f4a_7c15,
        ..cfg.fuzz
    };
    let main = fuzz_loop(program, &corpus, &plan, fuzz)?;
    Ok(TrialResult { mode, seed, main, checks: plan.len() })
}
