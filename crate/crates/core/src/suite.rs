//! Benchmark targets shipped with the crate.

use crate::interp::{Fault, FaultKind};
use crate::ir::{parse_program, Program};

/// A fault the target was written to contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlantedFault {
    pub kind: FaultKind,
    /// Innermost non-runtime function.
    pub function: &'static str,
}

impl PlantedFault {
    pub fn matches(&self, fault: &Fault) -> bool {
        fault.kind == self.kind && fault.function == self.function
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Target {
    pub name: &'static str,
    pub source: &'static str,
    /// The fault sits behind a value condition that never shows up as a
    /// distinct edge.
    pub state_bug: bool,
    pub planted: &'static [PlantedFault],
}

impl Target {
    pub fn program(&self) -> Program {
        parse_program(self.source)
            .unwrap_or_else(|e| panic!("built-in target {} does not parse: {e}", self.name))
    }

    pub fn is_planted(&self, fault: &Fault) -> bool {
        self.planted.iter().any(|p| p.matches(fault))
    }
}

const fn planted(kind: FaultKind, function: &'static str) -> PlantedFault {
    PlantedFault { kind, function }
}

pub const TARGETS: &[Target] = &[
    Target {
        name: "seq_match",
        source: include_str!("../targets/seq_match.ir"),
        state_bug: true,
        planted: &[planted(FaultKind::BugInstruction, "main")],
    },
    Target {
        name: "magic_xor",
        source: include_str!("../targets/magic_xor.ir"),
        state_bug: true,
        planted: &[planted(FaultKind::DivByZero, "main")],
    },
    Target {
        name: "branch_magic",
        source: include_str!("../targets/branch_magic.ir"),
        state_bug: false,
        planted: &[planted(FaultKind::BugInstruction, "main")],
    },
    Target {
        name: "div_len",
        source: include_str!("../targets/div_len.ir"),
        state_bug: false,
        planted: &[planted(FaultKind::DivByZero, "main")],
    },
    Target {
        name: "oob_table",
        source: include_str!("../targets/oob_table.ir"),
        state_bug: false,
        planted: &[planted(FaultKind::OobMemory, "main")],
    },
    Target {
        name: "nested_parse",
        source: include_str!("../targets/nested_parse.ir"),
        state_bug: false,
        planted: &[planted(FaultKind::OobInput, "parse"), planted(FaultKind::OobInput, "rt_copy")],
    },
];

pub fn target(name: &str) -> Option<&'static Target> {
    TARGETS.iter().find(|t| t.name == name)
}

pub fn state_bug_targets() -> impl Iterator<Item = &'static Target> {
    TARGETS.iter().filter(|t| t.state_bug)
}
