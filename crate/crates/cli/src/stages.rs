use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use invscov_core::analysis::ProgramAnalysis;
use invscov_core::feedback::{CheckMode, CheckPlan};
use invscov_core::fuzzer::{fuzz_loop, read_corpus_dir, write_campaign, CampaignResult, FuzzConfig};
use invscov_core::interp::{execute, FaultKind, Limits, StackFrame};
use invscov_core::ir::{parse_program, Program};
use invscov_core::miner::{
    finalize, parse_decls, record_traces, write_decls, write_dtrace_record, DtraceReader,
    InvariantRecord, InvariantSetReport, LearnConfig, Learner, MiningOutcome,
};
use invscov_core::pipeline::Mode;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, PipelineError};

/// Serialized output of `learn`, the only thing `fuzz` reads besides the
/// program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantsFile {
    pub entry: String,
    pub learned: usize,
    pub pruned: usize,
    pub capped: usize,
    pub emitted: usize,
    /// One record per (program point, check).
    pub checks: Vec<InvariantRecord>,
}

pub fn load_program(path: &Path) -> Result<Program, PipelineError> {
    let text = fs::read_to_string(path).map_err(PipelineError::io(path))?;
    parse_program(&text).map_err(|source| PipelineError::Parse { path: path.to_path_buf(), source })
}

pub(crate) fn write_text_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(PipelineError::io(dir))?;
    }
    fs::write(path, contents).map_err(PipelineError::io(path))
}

pub(crate) fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| PipelineError::format(path, e))?;
    s.push('\n');
    write_text_file(path, s)
}

fn read_existing(path: &Path) -> Result<String, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::Missing(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(PipelineError::io(path))
}

#[derive(Clone, Debug)]
pub struct DumpOutput {
    pub decls: PathBuf,
    pub dtrace: PathBuf,
    pub analysis: PathBuf,
    pub records: usize,
    /// Corpus positions of inputs that faulted or timed out.
    pub skipped: Vec<usize>,
}

/// Runs the analyses, writes `decls` and streams the `dtrace` of every
/// corpus input to `<out>/dump/`.
pub fn cmd_dump(config: &PipelineConfig) -> Result<DumpOutput, PipelineError> {
    config.validate()?;
    let program = load_program(config.program_path()?)?;
    let corpus_dir = config
        .corpus
        .as_deref()
        .ok_or_else(|| PipelineError::Config("--corpus is required".into()))?;
    let corpus = read_corpus_dir(corpus_dir).map_err(PipelineError::io(corpus_dir))?;
    if corpus.is_empty() {
        return Err(PipelineError::EmptyCorpus(corpus_dir.to_path_buf()));
    }
    let analysis = ProgramAnalysis::new(&program);
    let dir = config.stage_dir("dump");
    let out = DumpOutput {
        decls: dir.join("trace.decls"),
        dtrace: dir.join("trace.dtrace"),
        analysis: dir.join("analysis.json"),
        records: 0,
        skipped: Vec::new(),
    };
    write_json_file(&out.analysis, &analysis.describe(&program))?;
    write_text_file(&out.decls, write_decls(&program, &analysis))?;

    let file = fs::File::create(&out.dtrace).map_err(PipelineError::io(&out.dtrace))?;
    let mut w = BufWriter::new(file);
    let mut stream = record_traces(&program, &analysis, &corpus, Limits::default());
    let mut records = 0;
    for rec in stream.by_ref() {
        write_dtrace_record(&mut w, &program, &analysis, &rec).map_err(PipelineError::io(&out.dtrace))?;
        records += 1;
    }
    w.flush().map_err(PipelineError::io(&out.dtrace))?;
    for &i in &stream.skipped {
        warn!("corpus input #{i} faulted or ran out of steps; skipped");
    }
    info!("dumped {records} block records from {} inputs", corpus.len());
    Ok(DumpOutput { records, skipped: stream.skipped.clone(), ..out })
}

#[derive(Clone, Debug)]
pub struct LearnOutput {
    pub invariants: PathBuf,
    pub report: PathBuf,
    pub outcome: MiningOutcome,
}

/// learn → prune → cap → dedup over the dumped traces; writes
/// `<out>/learn/invariants.json` and a readable `report.txt`.
pub fn cmd_learn(config: &PipelineConfig) -> Result<LearnOutput, PipelineError> {
    config.validate()?;
    let program = load_program(config.program_path()?)?;
    let analysis = ProgramAnalysis::new(&program);
    let dump = config.stage_dir("dump");
    let (decls_path, dtrace_path) = (dump.join("trace.decls"), dump.join("trace.dtrace"));

    let decls = parse_decls(&read_existing(&decls_path)?).map_err(|e| PipelineError::format(&decls_path, e))?;
    let expected = parse_decls(&write_decls(&program, &analysis)).expect("own decls parse");
    if decls != expected {
        return Err(PipelineError::format(&decls_path, "declarations do not match the program"));
    }
    if !dtrace_path.exists() {
        return Err(PipelineError::Missing(dtrace_path));
    }
    let file = fs::File::open(&dtrace_path).map_err(PipelineError::io(&dtrace_path))?;
    let mut learner = Learner::new(&analysis, LearnConfig { min_samples: config.min_samples });
    for rec in DtraceReader::new(BufReader::new(file), &program, &analysis) {
        learner.observe(&rec.map_err(|e| PipelineError::format(&dtrace_path, e))?);
    }
    let outcome = finalize(learner.finish(), &analysis, config.max_per_block);

    let dir = config.stage_dir("learn");
    let file = InvariantsFile {
        entry: program.entry_function().name.clone(),
        learned: outcome.learned,
        pruned: outcome.pruned.len(),
        capped: outcome.capped.len(),
        emitted: outcome.report.invariants.len(),
        checks: outcome.report.to_records(&program),
    };
    let out = LearnOutput { invariants: dir.join("invariants.json"), report: dir.join("report.txt"), outcome };
    write_json_file(&out.invariants, &file)?;
    write_text_file(&out.report, learn_report(&program, &out.outcome))?;
    info!(
        "learned {}, pruned {}, capped {}, emitted {} at {} sites",
        file.learned,
        file.pruned,
        file.capped,
        file.emitted,
        file.checks.len()
    );
    Ok(out)
}

fn learn_report(p: &Program, m: &MiningOutcome) -> String {
    let mut s = String::new();
    let r = &m.report;
    s.push_str(&format!("learned: {}\n", m.learned));
    s.push_str(&format!("pruned: inviolable: {}\n", m.pruned.len()));
    s.push_str(&format!("capped: {}\n", m.capped.len()));
    s.push_str(&format!("emitted: {}\n", r.invariants.len()));
    s.push_str(&format!("check sites: {} ({} reuse a dominating emission)\n", r.sites.len(), r.reused_sites()));

    s.push_str("\n[emitted]\n");
    for inv in &r.invariants {
        let f = p.func(inv.function);
        let users: Vec<String> =
            r.sites.iter().filter(|x| x.id == inv.id).map(|x| f.ppt_name(x.block)).collect();
        s.push_str(&format!(
            "#{} {}: {}  samples={} users={} [{}]\n",
            inv.id,
            f.ppt_name(inv.block),
            inv.display(f),
            inv.samples,
            users.len(),
            users.join(", ")
        ));
    }
    for (title, list) in [("pruned: inviolable", &m.pruned), ("capped", &m.capped)] {
        s.push_str(&format!("\n[{title}]\n"));
        for inv in list {
            let f = p.func(inv.function);
            s.push_str(&format!("{}: {}\n", f.ppt_name(inv.block), inv.display(f)));
        }
    }
    s
}

/// Check set for `mode`; invscov reads it from the invariants JSON only.
fn load_plan(config: &PipelineConfig, program: &Program) -> Result<CheckPlan, PipelineError> {
    match config.mode {
        Mode::EdgeOnly => Ok(CheckPlan::empty(program)),
        Mode::Invscov => {
            let path = config.invariants_path();
            let text = read_existing(&path)?;
            let file: InvariantsFile =
                serde_json::from_str(&text).map_err(|e| PipelineError::format(&path, e))?;
            let report = InvariantSetReport::from_records(program, &file.checks)
                .map_err(|e| PipelineError::format(&path, e))?;
            Ok(CheckPlan::new(program, &report, CheckMode::Dedup))
        }
    }
}

/// Runs one campaign in `config.mode` and writes it to
/// `<out>/fuzz-<mode>/`.
pub fn cmd_fuzz(config: &PipelineConfig) -> Result<CampaignResult, PipelineError> {
    config.validate()?;
    let program = load_program(config.program_path()?)?;
    let plan = load_plan(config, &program)?;
    let seeds = match &config.corpus {
        Some(dir) => {
            let c = read_corpus_dir(dir).map_err(PipelineError::io(dir))?;
            if c.is_empty() {
                return Err(PipelineError::EmptyCorpus(dir.clone()));
            }
            c
        }
        None => vec![Vec::new()],
    };
    let fuzz = FuzzConfig { budget: config.budget, rng_seed: config.rng_seed, ..FuzzConfig::default() };
    let result = fuzz_loop(&program, &seeds, &plan, fuzz)?;
    let dir = config.stage_dir(&format!("fuzz-{}", config.mode));
    write_campaign(&dir, &result).map_err(PipelineError::io(&dir))?;
    info!(
        "{}: {} execs, corpus {}, {} unique crashes, {} checks",
        config.mode,
        result.stats.total.execs,
        result.corpus.len(),
        result.crashes.len(),
        plan.len()
    );
    Ok(result)
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub seed: CampaignResult,
    pub dump: DumpOutput,
    pub learn: Option<LearnOutput>,
    pub fuzz: CampaignResult,
}

/// seed run (edge coverage, `seed_execs`) → dump → learn → fuzz in
/// `config.mode` from the seed corpus. The seed run lands in `<out>/seed/`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let program = load_program(config.program_path()?)?;
    let fuzz = FuzzConfig { budget: config.seed_execs, rng_seed: config.rng_seed, ..FuzzConfig::default() };
    let seed = fuzz_loop(&program, &[Vec::new()], &CheckPlan::empty(&program), fuzz)?;
    let seed_dir = config.stage_dir("seed");
    let files = write_campaign(&seed_dir, &seed).map_err(PipelineError::io(&seed_dir))?;
    if seed.corpus.is_empty() {
        return Err(PipelineError::EmptyCorpus(files.corpus_dir));
    }

    let mut stage = config.clone();
    stage.corpus = Some(files.corpus_dir.clone());
    let dump = cmd_dump(&stage)?;
    let learn = match config.mode {
        Mode::Invscov => Some(cmd_learn(&stage)?),
        Mode::EdgeOnly => None,
    };
    stage.rng_seed = config.rng_seed ^ 0x9e37_79b9_7f4a_7c15;
    let fuzz = cmd_fuzz(&stage)?;
    Ok(PipelineOutput { seed, dump, learn, fuzz })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriageEntry {
    pub hash: String,
    pub kind: FaultKind,
    pub function: String,
    pub line: usize,
    pub stack: Vec<StackFrame>,
    pub inputs: Vec<String>,
}

/// Re-executes every file of the crash directory (`--corpus`) and groups
/// them by call-stack hash; writes `<out>/triage/triage.json`.
pub fn cmd_triage(config: &PipelineConfig) -> Result<Vec<TriageEntry>, PipelineError> {
    config.validate()?;
    let program = load_program(config.program_path()?)?;
    let dir = config
        .corpus
        .as_deref()
        .ok_or_else(|| PipelineError::Config("--corpus (crash directory) is required".into()))?;
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(PipelineError::io(dir))?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| !n.starts_with('.') && !n.ends_with(".json"))
        .collect();
    names.sort();
    let mut groups: BTreeMap<u64, TriageEntry> = BTreeMap::new();
    for name in names {
        let path = dir.join(&name);
        let input = fs::read(&path).map_err(PipelineError::io(&path))?;
        let r = execute(&program, &input, &mut (), &Limits::default());
        let Some(fault) = r.fault() else {
            warn!("{name} does not crash");
            continue;
        };
        groups
            .entry(fault.callstack_hash())
            .or_insert_with(|| TriageEntry {
                hash: format!("{:016x}", fault.callstack_hash()),
                kind: fault.kind,
                function: fault.function.clone(),
                line: fault.line,
                stack: fault.stack.clone(),
                inputs: Vec::new(),
            })
            .inputs
            .push(name);
    }
    let entries: Vec<TriageEntry> = groups.into_values().collect();
    write_json_file(&config.stage_dir("triage").join("triage.json"), &entries)?;
    Ok(entries)
}
