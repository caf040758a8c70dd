//! Pipeline stages behind the `invscov` binary: dump traces, learn
//! invariants, fuzz, compare both fuzzer modes over the built-in suite, and
//! triage crashes. Every stage writes below one run directory.

mod bench;
mod config;
mod stages;

pub use bench::{cmd_bench, median, render, BenchReport, TargetReport, TrialSummary};
pub use config::{PipelineConfig, PipelineError, DEFAULT_BUDGET, DEFAULT_SEED_EXECS};
pub use stages::{
    cmd_dump, cmd_fuzz, cmd_learn, cmd_triage, run_pipeline, DumpOutput, InvariantsFile, LearnOutput,
    PipelineOutput, TriageEntry,
};
pub use invscov_core::pipeline::Mode;
