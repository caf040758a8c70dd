use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use invscov_cli::{
    cmd_bench, cmd_dump, cmd_fuzz, cmd_learn, cmd_triage, render, run_pipeline, Mode, PipelineConfig,
    PipelineError, DEFAULT_BUDGET, DEFAULT_SEED_EXECS,
};
use invscov_core::miner::{DEFAULT_MAX_PER_BLOCK, DEFAULT_MIN_SAMPLES};

#[derive(Parser)]
#[command(name = "invscov", version, about = "Invariant-coverage fuzzing pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write decls and dtrace for a program over a corpus.
    Dump(Opts),
    /// Learn, prune and deduplicate invariants from the dumped traces.
    Learn(Opts),
    /// Run one fuzzing campaign.
    Fuzz(Opts),
    /// Seed run, dump, learn and fuzz in one go.
    Pipeline(Opts),
    /// Compare both modes over the built-in benchmark suite.
    Bench(Opts),
    /// Group crashing inputs by call-stack hash.
    Triage(Opts),
}

#[derive(Args)]
struct Opts {
    /// IR program file.
    #[arg(long)]
    program: Option<PathBuf>,
    /// Input corpus directory (crash directory for `triage`).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Run directory; all outputs go below it.
    #[arg(long, default_value = "run")]
    out: PathBuf,
    /// Executions of the edge-coverage seed run.
    #[arg(long, default_value_t = DEFAULT_SEED_EXECS)]
    seed_execs: u64,
    /// Executions of the fuzzing campaign.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// edge-only or invscov.
    #[arg(long, default_value = "invscov")]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Invariants JSON for `fuzz` (default: <out>/learn/invariants.json).
    #[arg(long)]
    invariants: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_SAMPLES)]
    min_samples: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_PER_BLOCK)]
    max_per_block: usize,
    /// Comma-separated suite targets for `bench`.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
}

impl From<Opts> for PipelineConfig {
    fn from(o: Opts) -> Self {
        PipelineConfig {
            program: o.program,
            corpus: o.corpus,
            out: o.out,
            seed_execs: o.seed_execs,
            budget: o.budget,
            rng_seed: o.seed,
            mode: o.mode,
            trials: o.trials,
            invariants: o.invariants,
            min_samples: o.min_samples,
            max_per_block: o.max_per_block,
            targets: o.targets,
        }
    }
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Dump(o) => {
            let d = cmd_dump(&o.into())?;
            println!("{} records -> {}", d.records, d.dtrace.display());
            if !d.skipped.is_empty() {
                println!("skipped {} faulting inputs", d.skipped.len());
            }
        }
        Command::Learn(o) => {
            let l = cmd_learn(&o.into())?;
            print!("{}", std::fs::read_to_string(&l.report).unwrap_or_default().lines().take(5).map(|l| format!("{l}\n")).collect::<String>());
            println!("-> {}", l.invariants.display());
        }
        Command::Fuzz(o) => print_campaign(&cmd_fuzz(&o.into())?),
        Command::Pipeline(o) => print_campaign(&run_pipeline(&o.into())?.fuzz),
        Command::Bench(o) => print!("{}", render(&cmd_bench(&o.into())?)),
        Command::Triage(o) => {
            for e in cmd_triage(&o.into())? {
                println!("{} {} in {} (line {}): {} inputs", e.hash, e.kind, e.function, e.line, e.inputs.len());
            }
        }
    }
    Ok(())
}

fn print_campaign(r: &invscov_core::fuzzer::CampaignResult) {
    let t = &r.stats.total;
    println!(
        "execs {}  corpus {}  unique crashes {}  faults {}  timeouts {}  ({:.0} execs/s)",
        t.execs, t.corpus_size, t.unique_bugs, t.faults, t.timeouts, r.timing.execs_per_sec
    );
    for c in r.crashes.iter() {
        println!("  {:016x} {} in {} (line {})", c.hash, c.kind, c.function, c.line);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
