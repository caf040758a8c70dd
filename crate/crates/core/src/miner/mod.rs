//! Likely-invariant mining over block-state traces.

mod daikon;
mod dedup;
mod invariant;
mod learn;
mod prune;
mod trace;

pub use daikon::{
    parse_decls, write_decls, write_dtrace_record, DeclPpt, DeclVar, DtraceReader, TraceFormatError,
};
pub use dedup::{deduplicate, CheckSite, InvariantSetReport, RecordError};
pub use invariant::{
    Invariant, InvariantKind, InvariantRecord, LINEAR_COEFF_LIMIT, MAX_INVARIANT_ID,
};
pub use learn::{
    cap_per_block, group_by_ppt, learn_invariants, pair_eligible, LearnConfig, Learner,
    DEFAULT_MAX_PER_BLOCK, DEFAULT_MIN_SAMPLES,
};
pub use prune::{implied_by_ranges, prune_inviolable};
pub use trace::{record_traces, BlockStateRecord, TraceStream};

use crate::analysis::ProgramAnalysis;

/// Outcome of every stage after learning, kept for reporting.
#[derive(Clone, Debug, Default)]
pub struct MiningOutcome {
    pub learned: usize,
    pub pruned: Vec<Invariant>,
    pub capped: Vec<Invariant>,
    pub report: InvariantSetReport,
}

/// learn → prune → per-block cap → dedup, over already-learned invariants.
pub fn finalize(
    learned: Vec<Invariant>,
    analysis: &ProgramAnalysis,
    max_per_block: usize,
) -> MiningOutcome {
    let count = learned.len();
    let (kept, pruned) = prune_inviolable(learned, analysis);
    let (kept, capped) = cap_per_block(kept, max_per_block);
    MiningOutcome { learned: count, pruned, capped, report: deduplicate(kept, analysis) }
}
