use std::path::{Path, PathBuf};

use invscov_core::ir::IrError;
use invscov_core::miner::{DEFAULT_MAX_PER_BLOCK, DEFAULT_MIN_SAMPLES};
use invscov_core::pipeline::Mode;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_SEED_EXECS: u64 = 20_000;
/// Campaign executions after the seed run; with the seed run this makes a
/// total of 2·10⁵ per trial.
pub const DEFAULT_BUDGET: u64 = 180_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineConfig {
    pub program: Option<PathBuf>,
    /// Input corpus; `dump` requires it, `fuzz` starts from it when given.
    pub corpus: Option<PathBuf>,
    /// Run directory; every stage writes below it.
    pub out: PathBuf,
    /// Executions of the edge-coverage seed run.
    pub seed_execs: u64,
    /// Executions of the fuzzing campaign proper.
    pub budget: u64,
    pub rng_seed: u64,
    pub mode: Mode,
    pub trials: u32,
    /// Overrides `<out>/learn/invariants.json` for `fuzz`.
    pub invariants: Option<PathBuf>,
    pub min_samples: u64,
    pub max_per_block: usize,
    /// Restricts `bench` to these suite targets; empty means all.
    pub targets: Vec<String>,
}

impl PipelineConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            program: None,
            corpus: None,
            out: out.into(),
            seed_execs: DEFAULT_SEED_EXECS,
            budget: DEFAULT_BUDGET,
            rng_seed: 0,
            mode: Mode::Invscov,
            trials: 3,
            invariants: None,
            min_samples: DEFAULT_MIN_SAMPLES,
            max_per_block: DEFAULT_MAX_PER_BLOCK,
            targets: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.seed_execs == 0 || self.budget == 0 {
            return Err(PipelineError::Config("budgets must be positive".into()));
        }
        if self.trials == 0 {
            return Err(PipelineError::Config("trials must be at least 1".into()));
        }
        if self.min_samples == 0 || self.max_per_block == 0 {
            return Err(PipelineError::Config("min-samples and max-per-block must be positive".into()));
        }
        Ok(())
    }

    pub fn program_path(&self) -> Result<&Path, PipelineError> {
        self.program.as_deref().ok_or_else(|| PipelineError::Config("--program is required".into()))
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.out.join(stage)
    }

    pub fn invariants_path(&self) -> PathBuf {
        self.invariants.clone().unwrap_or_else(|| self.stage_dir("learn").join("invariants.json"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("corpus empty: {0}")]
    EmptyCorpus(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: IrError },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("missing input {0} (run the previous stage first)")]
    Missing(PathBuf),
    #[error(transparent)]
    Fuzz(#[from] invscov_core::fuzzer::FuzzError),
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PipelineError {
        let path = path.into();
        move |source| PipelineError::Io { path, source }
    }

    pub fn format(path: &Path, message: impl ToString) -> PipelineError {
        PipelineError::Format { path: path.to_path_buf(), message: message.to_string() }
    }

    /// Configuration problems are usage errors; everything else is a
    /// pipeline failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, PipelineError::Config(_))
    }
}
