//! Static analyses run once per program before learning: comparability
//! classes, dump-variable selection, value ranges and dominators.

mod comparability;
mod dump;
mod range;

pub use comparability::{compute_comparability, merge_comparability, ClassId, ComparabilityMap};
pub use dump::{select_dump_variables, DumpSet};
pub use range::{compute_ranges, Interval, RangeMap, NEG_INF, POS_INF};

use serde::{Deserialize, Serialize};

use crate::ir::{
    build_cfg, dominator_tree, Cfg, DominatorTree, FuncId, Function, Program, ScalarType,
};

/// Everything the miner and the check planner need about one function.
#[derive(Clone, Debug)]
pub struct FunctionAnalysis {
    pub cfg: Cfg,
    pub dom: DominatorTree,
    pub comparability: ComparabilityMap,
    pub dump: DumpSet,
    pub ranges: RangeMap,
}

impl FunctionAnalysis {
    pub fn new(f: &Function) -> Self {
        let cfg = build_cfg(f);
        let dom = dominator_tree(&cfg).expect("validated functions have no unreachable blocks");
        FunctionAnalysis {
            comparability: compute_comparability(f),
            dump: select_dump_variables(f),
            ranges: compute_ranges(f),
            cfg,
            dom,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProgramAnalysis {
    pub functions: Vec<FunctionAnalysis>,
}

impl ProgramAnalysis {
    pub fn new(p: &Program) -> Self {
        ProgramAnalysis { functions: p.functions.iter().map(FunctionAnalysis::new).collect() }
    }

    pub fn func(&self, f: FuncId) -> &FunctionAnalysis {
        &self.functions[f.index()]
    }

    /// Machine-readable summary; see `docs/formats.md`.
    pub fn describe(&self, p: &Program) -> AnalysisDescription {
        let mut ppts = Vec::new();
        for (fid, fa) in p.func_ids().zip(&self.functions) {
            let f = p.func(fid);
            for b in f.block_ids() {
                let variables = fa
                    .dump
                    .block(b)
                    .iter()
                    .map(|&v| {
                        let r = fa.ranges.get(v);
                        VariableDescription {
                            name: f.value_name(v).to_string(),
                            ty: f.value(v).ty,
                            comparability: fa.comparability.class(v).map_or(-1, |c| c as i64),
                            lo: r.lo,
                            hi: r.hi,
                        }
                    })
                    .collect();
                ppts.push(PptDescription {
                    name: f.ppt_name(b),
                    function: f.name.clone(),
                    block: b.0,
                    loc: f.block(b).loc,
                    variables,
                });
            }
        }
        AnalysisDescription { entry: p.entry_function().name.clone(), ppts }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisDescription {
    pub entry: String,
    pub ppts: Vec<PptDescription>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PptDescription {
    pub name: String,
    pub function: String,
    pub block: u32,
    pub loc: u16,
    pub variables: Vec<VariableDescription>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDescription {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ScalarType,
    /// `-1` for the universal class.
    pub comparability: i64,
    pub lo: i128,
    pub hi: i128,
}
