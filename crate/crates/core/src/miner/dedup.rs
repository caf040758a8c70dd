use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::invariant::{Invariant, InvariantKind, InvariantRecord, MAX_INVARIANT_ID};
use crate::analysis::ProgramAnalysis;
use crate::ir::{BlockId, FuncId, Program, ValueId};

/// One program point that checks an invariant. When `block` differs from the
/// invariant's own block the check reuses the outcome computed at the
/// dominating emission site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CheckSite {
    pub function: FuncId,
    pub block: BlockId,
    pub id: u32,
}

/// Final check set: emitted invariants with dense ids and every site using
/// them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantSetReport {
    /// Ordered by id; `invariants[i].id == i + 1`. The invariant's block is
    /// its emission site.
    pub invariants: Vec<Invariant>,
    /// Ordered by (function, block, id).
    pub sites: Vec<CheckSite>,
}

impl InvariantSetReport {
    pub fn get(&self, id: u32) -> &Invariant {
        &self.invariants[id as usize - 1]
    }

    /// Number of sites that reuse an emission elsewhere.
    pub fn reused_sites(&self) -> usize {
        self.sites.iter().filter(|s| self.get(s.id).block != s.block).count()
    }

    pub fn to_records(&self, p: &Program) -> Vec<InvariantRecord> {
        self.sites
            .iter()
            .map(|s| {
                let inv = self.get(s.id);
                let f = p.func(inv.function);
                InvariantRecord {
                    id: inv.id,
                    ppt: f.ppt_name(s.block),
                    kind: inv.kind.name().to_string(),
                    vars: inv.vars.iter().map(|v| f.value_name(*v).to_string()).collect(),
                    params: inv.kind.params(),
                    emission_site: f.ppt_name(inv.block),
                    samples: inv.samples,
                }
            })
            .collect()
    }

    /// Rebuilds the report from its serialized records, checking them
    /// against `p`.
    pub fn from_records(p: &Program, records: &[InvariantRecord]) -> Result<Self, RecordError> {
        let mut invariants: Vec<Option<Invariant>> = Vec::new();
        let mut sites = Vec::new();
        for (i, r) in records.iter().enumerate() {
            let bad = |m: String| RecordError { index: i, message: m };
            if r.id == 0 || r.id > MAX_INVARIANT_ID {
                return Err(bad(format!("id {} out of range", r.id)));
            }
            let (function, block) =
                p.resolve_ppt(&r.ppt).ok_or_else(|| bad(format!("unknown ppt `{}`", r.ppt)))?;
            let (ef, eblock) = p
                .resolve_ppt(&r.emission_site)
                .ok_or_else(|| bad(format!("unknown emission site `{}`", r.emission_site)))?;
            if ef != function {
                return Err(bad("emission site in another function".into()));
            }
            let kind = InvariantKind::from_parts(&r.kind, &r.params)
                .ok_or_else(|| bad(format!("bad kind `{}` / params {:?}", r.kind, r.params)))?;
            if kind.arity() != r.vars.len() {
                return Err(bad("wrong number of variables".into()));
            }
            let f = p.func(function);
            let vars = r
                .vars
                .iter()
                .map(|n| f.value_id(n).ok_or_else(|| bad(format!("unknown variable `{n}`"))))
                .collect::<Result<Vec<ValueId>, _>>()?;
            for v in &vars {
                if !f.block(eblock).state.contains(v) || !f.block(block).state.contains(v) {
                    return Err(bad(format!("`{}` is not in the block state", f.value_name(*v))));
                }
            }
            let inv = Invariant { id: r.id, function, block: eblock, kind, vars, samples: r.samples };
            let slot = r.id as usize - 1;
            if invariants.len() <= slot {
                invariants.resize(slot + 1, None);
            }
            match &invariants[slot] {
                Some(prev) if prev.canonical_key() != inv.canonical_key() || prev.block != inv.block => {
                    return Err(bad(format!("id {} used for two different invariants", r.id)));
                }
                _ => invariants[slot] = Some(inv),
            }
            sites.push(CheckSite { function, block, id: r.id });
        }
        let invariants = invariants
            .into_iter()
            .enumerate()
            .map(|(i, inv)| {
                inv.ok_or(RecordError { index: 0, message: format!("id {} is missing", i + 1) })
            })
            .collect::<Result<Vec<_>, _>>()?;
        sites.sort();
        sites.dedup();
        Ok(InvariantSetReport { invariants, sites })
    }
}

#[derive(Debug, Error)]
#[error("invariant record {index}: {message}")]
pub struct RecordError {
    pub index: usize,
    pub message: String,
}

/// Collapses identical invariants along dominator chains: an invariant held
/// at several blocks is emitted at the topmost one that dominates the others,
/// and every dominated block reuses that outcome.
///
/// Emitted invariants get fresh dense ids from 1 in input order; if more than
/// the id space allows survive, the rest are dropped.
pub fn deduplicate(
    invs: Vec<Invariant>,
    analysis: &ProgramAnalysis,
) -> InvariantSetReport {
    let mut held: HashSet<(FuncId, BlockId, &InvariantKind, &[ValueId])> = HashSet::new();
    for inv in &invs {
        held.insert((inv.function, inv.block, &inv.kind, &inv.vars));
    }
    // Emission block for each input invariant.
    let emission: Vec<BlockId> = invs
        .iter()
        .map(|inv| {
            let dom = &analysis.func(inv.function).dom;
            dom.chain(inv.block)
                .filter(|b| held.contains(&(inv.function, *b, &inv.kind, &inv.vars[..])))
                .last()
                .unwrap_or(inv.block)
        })
        .collect();

    let mut ids: HashMap<(FuncId, BlockId, &InvariantKind, &[ValueId]), u32> = HashMap::new();
    let mut report = InvariantSetReport::default();
    for (inv, &eb) in invs.iter().zip(&emission) {
        if eb != inv.block {
            continue;
        }
        let next = report.invariants.len() as u32 + 1;
        if next > MAX_INVARIANT_ID {
            log::warn!("invariant id space exhausted, dropping the rest");
            continue;
        }
        ids.insert((inv.function, inv.block, &inv.kind, &inv.vars), next);
        report.invariants.push(Invariant { id: next, ..inv.clone() });
    }
    for (inv, &eb) in invs.iter().zip(&emission) {
        if let Some(&id) = ids.get(&(inv.function, eb, &inv.kind, &inv.vars[..])) {
            report.sites.push(CheckSite { function: inv.function, block: inv.block, id });
        }
    }
    report.sites.sort();
    report
}
