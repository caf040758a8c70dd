use std::collections::BTreeSet;
use std::fmt::Write as _;

use invscov_core::analysis::ProgramAnalysis;
use invscov_core::fuzzer::FuzzConfig;
use invscov_core::pipeline::{run_trial, MineConfig, Mode, TrialConfig, TrialResult};
use invscov_core::suite::{Target, TARGETS};
use invscov_core::miner::LearnConfig;
use log::info;
use serde::Serialize;

use crate::config::{PipelineConfig, PipelineError};
use crate::stages::{write_json_file, write_text_file};

#[derive(Clone, Debug, Serialize)]
pub struct TrialSummary {
    pub rng_seed: u64,
    /// Call-stack hashes of every crash, seed run included.
    pub bugs: Vec<String>,
    pub planted_found: bool,
    pub execs: u64,
    /// Throughput of the campaign after the seed run.
    pub execs_per_sec: f64,
    pub checks: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TargetReport {
    pub target: String,
    pub state_bug: bool,
    pub edge_only: Vec<TrialSummary>,
    pub invscov: Vec<TrialSummary>,
    /// Median unique bugs per trial.
    pub edge_only_bugs: f64,
    pub invscov_bugs: f64,
    /// Bugs found by both modes, over the union of all trials.
    pub intersection: usize,
    /// Trials that hit a planted fault.
    pub edge_only_hits: usize,
    pub invscov_hits: usize,
    /// Median execs/sec of edge-only over median execs/sec of invscov.
    pub overhead: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub trials: u32,
    pub seed_execs: u64,
    pub budget: u64,
    pub targets: Vec<TargetReport>,
    /// Median of the per-target overhead ratios.
    pub median_overhead: f64,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn summarize(t: &Target, r: &TrialResult, rng_seed: u64) -> TrialSummary {
    let crashes = r.crashes();
    let planted_found =
        crashes.iter().any(|c| t.planted.iter().any(|p| p.kind == c.kind && p.function == c.function));
    TrialSummary {
        rng_seed,
        bugs: crashes.iter().map(|c| format!("{:016x}", c.hash)).collect(),
        planted_found,
        execs: r.total_execs(),
        execs_per_sec: r.main.timing.execs_per_sec,
        checks: r.checks,
    }
}

fn bench_target(t: &Target, config: &PipelineConfig) -> Result<TargetReport, PipelineError> {
    let program = t.program();
    let analysis = ProgramAnalysis::new(&program);
    let mine = MineConfig {
        learn: LearnConfig { min_samples: config.min_samples },
        max_per_block: config.max_per_block,
        ..MineConfig::default()
    };
    let (mut edge, mut inv) = (Vec::new(), Vec::new());
    for trial in 0..config.trials as u64 {
        let rng_seed = config.rng_seed.wrapping_add(trial);
        let cfg = TrialConfig {
            seed_execs: config.seed_execs,
            budget: config.seed_execs + config.budget,
            rng_seed,
            fuzz: FuzzConfig::default(),
            mine,
        };
        // Modes alternate so that both see the same machine conditions.
        for (mode, out) in [(Mode::EdgeOnly, &mut edge), (Mode::Invscov, &mut inv)] {
            let r = run_trial(&program, &analysis, mode, &cfg)?;
            let s = summarize(t, &r, rng_seed);
            info!(
                "{} {mode} trial {trial}: {} bugs, planted={}, {:.0} execs/s",
                t.name,
                s.bugs.len(),
                s.planted_found,
                s.execs_per_sec
            );
            out.push(s);
        }
    }
    let union = |v: &[TrialSummary]| v.iter().flat_map(|s| s.bugs.iter().cloned()).collect::<BTreeSet<_>>();
    let bugs = |v: &[TrialSummary]| median(&v.iter().map(|s| s.bugs.len() as f64).collect::<Vec<_>>());
    let eps = |v: &[TrialSummary]| median(&v.iter().map(|s| s.execs_per_sec).collect::<Vec<_>>());
    Ok(TargetReport {
        target: t.name.to_string(),
        state_bug: t.state_bug,
        edge_only_bugs: bugs(&edge),
        invscov_bugs: bugs(&inv),
        intersection: union(&edge).intersection(&union(&inv)).count(),
        edge_only_hits: edge.iter().filter(|s| s.planted_found).count(),
        invscov_hits: inv.iter().filter(|s| s.planted_found).count(),
        overhead: eps(&edge) / eps(&inv),
        edge_only: edge,
        invscov: inv,
    })
}

/// Runs `trials` trials per mode on each suite target (or the selected
/// ones) and writes `<out>/bench/report.{txt,json}`.
pub fn cmd_bench(config: &PipelineConfig) -> Result<BenchReport, PipelineError> {
    config.validate()?;
    let targets: Vec<&Target> = if config.targets.is_empty() {
        TARGETS.iter().collect()
    } else {
        config
            .targets
            .iter()
            .map(|n| {
                TARGETS
                    .iter()
                    .find(|t| t.name == n)
                    .ok_or_else(|| PipelineError::Config(format!("unknown target `{n}`")))
            })
            .collect::<Result<_, _>>()?
    };
    let mut reports = Vec::new();
    for t in targets {
        reports.push(bench_target(t, config)?);
    }
    let median_overhead = median(&reports.iter().map(|r| r.overhead).collect::<Vec<_>>());
    let report = BenchReport {
        trials: config.trials,
        seed_execs: config.seed_execs,
        budget: config.budget,
        targets: reports,
        median_overhead,
    };
    let dir = config.stage_dir("bench");
    write_json_file(&dir.join("report.json"), &report)?;
    write_text_file(&dir.join("report.txt"), render(&report))?;
    Ok(report)
}

/// Plain-text table of a bench report.
pub fn render(r: &BenchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<14} {:>15} {:>13} {:>12} {:>9} {:>9} {:>8}",
        "target", "edge-only bugs", "invscov bugs", "intersection", "edge hit", "inv hit", "overhead"
    );
    for t in &r.targets {
        let _ = writeln!(
            s,
            "{:<14} {:>15} {:>13} {:>12} {:>9} {:>9} {:>7.2}x",
            t.target,
            t.edge_only_bugs,
            t.invscov_bugs,
            t.intersection,
            format!("{}/{}", t.edge_only_hits, r.trials),
            format!("{}/{}", t.invscov_hits, r.trials),
            t.overhead
        );
    }
    let _ = writeln!(s, "median overhead: {:.2}x ({} trials per mode, medians reported)", r.median_overhead, r.trials);
    s
}
