use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::{BlockId, FuncId, Function, ValueId};

/// Largest id an emitted check may carry; `id << 1` must fit the 16-bit map.
pub const MAX_INVARIANT_ID: u32 = (1 << 15) - 1;

/// Largest magnitude of a linear coefficient or offset.
pub const LINEAR_COEFF_LIMIT: i128 = 1 << 15;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantKind {
    /// `x == c`
    ConstEqual(i128),
    /// `x ∈ {..}`, sorted, 2 or 3 values.
    OneOf(Vec<i128>),
    /// `x >= c`
    LowerBound(i128),
    /// `x <= c`
    UpperBound(i128),
    /// `x != 0`
    NonZero,
    /// `x == y`
    EqVars,
    /// `x <= y`
    LeVars,
    /// `y == a*x + b`
    Linear { a: i128, b: i128 },
}

impl InvariantKind {
    pub fn name(&self) -> &'static str {
        match self {
            InvariantKind::ConstEqual(_) => "const-equal",
            InvariantKind::OneOf(_) => "one-of",
            InvariantKind::LowerBound(_) => "lower-bound",
            InvariantKind::UpperBound(_) => "upper-bound",
            InvariantKind::NonZero => "non-zero",
            InvariantKind::EqVars => "eq-vars",
            InvariantKind::LeVars => "le-vars",
            InvariantKind::Linear { .. } => "linear",
        }
    }

    pub fn params(&self) -> Vec<i128> {
        match self {
            InvariantKind::ConstEqual(c)
            | InvariantKind::LowerBound(c)
            | InvariantKind::UpperBound(c) => vec![*c],
            InvariantKind::OneOf(vs) => vs.clone(),
            InvariantKind::NonZero | InvariantKind::EqVars | InvariantKind::LeVars => vec![],
            InvariantKind::Linear { a, b } => vec![*a, *b],
        }
    }

    pub fn from_parts(name: &str, params: &[i128]) -> Option<Self> {
        Some(match (name, params) {
            ("const-equal", [c]) => InvariantKind::ConstEqual(*c),
            ("one-of", vs) if (1..=3).contains(&vs.len()) => InvariantKind::OneOf(vs.to_vec()),
            ("lower-bound", [c]) => InvariantKind::LowerBound(*c),
            ("upper-bound", [c]) => InvariantKind::UpperBound(*c),
            ("non-zero", []) => InvariantKind::NonZero,
            ("eq-vars", []) => InvariantKind::EqVars,
            ("le-vars", []) => InvariantKind::LeVars,
            ("linear", [a, b]) => InvariantKind::Linear { a: *a, b: *b },
            _ => return None,
        })
    }

    pub fn arity(&self) -> usize {
        match self {
            InvariantKind::EqVars | InvariantKind::LeVars | InvariantKind::Linear { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.arity() == 2
    }

    /// Evaluates the predicate; `values` has one entry per variable.
    #[inline]
    pub fn holds(&self, values: &[i128]) -> bool {
        match self {
            InvariantKind::ConstEqual(c) => values[0] == *c,
            InvariantKind::OneOf(vs) => vs.contains(&values[0]),
            InvariantKind::LowerBound(c) => values[0] >= *c,
            InvariantKind::UpperBound(c) => values[0] <= *c,
            InvariantKind::NonZero => values[0] != 0,
            InvariantKind::EqVars => values[0] == values[1],
            InvariantKind::LeVars => values[0] <= values[1],
            InvariantKind::Linear { a, b } => values[1] == a * values[0] + b,
        }
    }

    fn render(&self, f: &mut fmt::Formatter<'_>, names: &[&str]) -> fmt::Result {
        let x = names[0];
        match self {
            InvariantKind::ConstEqual(c) => write!(f, "{x} == {c}"),
            InvariantKind::OneOf(vs) => {
                let vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "{x} one of {{ {} }}", vs.join(", "))
            }
            InvariantKind::LowerBound(c) => write!(f, "{x} >= {c}"),
            InvariantKind::UpperBound(c) => write!(f, "{x} <= {c}"),
            InvariantKind::NonZero => write!(f, "{x} != 0"),
            InvariantKind::EqVars => write!(f, "{x} == {}", names[1]),
            InvariantKind::LeVars => write!(f, "{x} <= {}", names[1]),
            InvariantKind::Linear { a, b } => write!(f, "{} == {a} * {x} + {b}", names[1]),
        }
    }
}

/// A likely invariant learned at one program point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariant {
    pub id: u32,
    pub function: FuncId,
    pub block: BlockId,
    pub kind: InvariantKind,
    pub vars: Vec<ValueId>,
    pub samples: u64,
}

impl Invariant {
    /// Identity used for deduplication: the same predicate over the same SSA
    /// values of the same function.
    pub fn canonical_key(&self) -> (FuncId, &InvariantKind, &[ValueId]) {
        (self.function, &self.kind, &self.vars)
    }

    pub fn display<'a>(&'a self, f: &'a Function) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Invariant, &'a Function);
        impl fmt::Display for D<'_> {
            fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
                let names: Vec<&str> = self.0.vars.iter().map(|v| self.1.value_name(*v)).collect();
                self.0.kind.render(out, &names)
            }
        }
        D(self, f)
    }
}

/// Serialized form of one (program point, check) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub id: u32,
    pub ppt: String,
    pub kind: String,
    pub vars: Vec<String>,
    pub params: Vec<i128>,
    pub emission_site: String,
    #[serde(default)]
    pub samples: u64,
}
