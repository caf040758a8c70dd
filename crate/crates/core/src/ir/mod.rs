//! The textual SSA intermediate representation the whole pipeline operates on.
//!
//! A [`Program`] is a list of [`Function`]s, each made of [`BasicBlock`]s that
//! hold straight-line [`Instruction`]s and end in exactly one [`Terminator`].
//! Values are referred to by [`ValueId`] within their function; names are kept
//! only for diagnostics, trace files and invariant reports.
//!
//! The grammar is documented in `docs/ir.md` at the repository root.

mod cfg;
mod dom;
mod parse;
mod types;
mod validate;

pub use cfg::{build_cfg, Cfg};
pub use dom::{dominator_tree, DominatorTree, UnreachableBlock};
pub use parse::parse_program;
pub use types::ScalarType;

use std::fmt;

use thiserror::Error;

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Index of a function inside its [`Program`].
    FuncId
);
id_type!(
    /// Per-function block ordinal. Block 0 is the root.
    BlockId
);
id_type!(
    /// Index of an SSA value inside its [`Function`].
    ValueId
);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bb{}", self.0)
    }
}

/// One validation finding, attached to a 1-based source line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum IrError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid program:\n{}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Clone, Debug)]
pub struct Program {
    pub functions: Vec<Function>,
    pub entry: FuncId,
    /// Seed of the PRNG that drew every block's `loc` label.
    pub seed: u64,
}

impl Program {
    pub fn func(&self, id: FuncId) -> &Function {
        &self.functions[id.index()]
    }

    pub fn entry_function(&self) -> &Function {
        self.func(self.entry)
    }

    pub fn function_id(&self, name: &str) -> Option<FuncId> {
        self.functions
            .iter()
            .position(|f| f.name == name)
            .map(|i| FuncId(i as u32))
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.function_id(name).map(|id| self.func(id))
    }

    pub fn func_ids(&self) -> impl Iterator<Item = FuncId> {
        (0..self.functions.len() as u32).map(FuncId)
    }

    pub fn block_count(&self) -> usize {
        self.functions.iter().map(|f| f.blocks.len()).sum()
    }

    /// Inverse of [`Function::ppt_name`].
    pub fn resolve_ppt(&self, ppt: &str) -> Option<(FuncId, BlockId)> {
        self.func_ids().find_map(|fid| {
            let f = self.func(fid);
            let label = ppt.strip_prefix(f.name.as_str())?.strip_prefix('.')?;
            f.block_by_label(label).map(|b| (fid, b))
        })
    }
}

#[derive(Clone, Debug)]
pub struct Function {
    pub name: String,
    pub params: Vec<ValueId>,
    pub ret_ty: ScalarType,
    pub blocks: Vec<BasicBlock>,
    pub values: Vec<ValueInfo>,
    pub line: usize,
}

impl Function {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.index()]
    }

    pub fn value(&self, id: ValueId) -> &ValueInfo {
        &self.values[id.index()]
    }

    pub fn value_name(&self, id: ValueId) -> &str {
        &self.values[id.index()].name
    }

    pub fn value_id(&self, name: &str) -> Option<ValueId> {
        self.values
            .iter()
            .position(|v| v.name == name)
            .map(|i| ValueId(i as u32))
    }

    pub fn block_by_label(&self, label: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.label == label).map(|i| BlockId(i as u32))
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> {
        (0..self.blocks.len() as u32).map(BlockId)
    }

    /// Iterates every non-terminator instruction together with its block.
    pub fn instructions(&self) -> impl Iterator<Item = (BlockId, &Instruction)> {
        self.blocks
            .iter()
            .flat_map(|b| b.instructions.iter().map(move |i| (b.id, i)))
    }

    /// Name of the program point that stands for `block`, e.g. `main.entry`.
    pub fn ppt_name(&self, block: BlockId) -> String {
        format!("{}.{}", self.name, self.block(block).label)
    }
}

#[derive(Clone, Debug)]
pub struct ValueInfo {
    pub name: String,
    pub ty: ScalarType,
    pub def: ValueDef,
}

impl ValueInfo {
    /// Named values stand for source-level variables; purely numeric names
    /// (`%0`, `%17`) are compiler temporaries.
    pub fn is_source_named(&self) -> bool {
        !self.name.starts_with(|c: char| c.is_ascii_digit())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueDef {
    Param(usize),
    Inst { block: BlockId, index: usize },
}

#[derive(Clone, Debug)]
pub struct BasicBlock {
    pub id: BlockId,
    pub label: String,
    /// Random-but-fixed 16-bit location label used by edge coverage.
    pub loc: u16,
    pub instructions: Vec<Instruction>,
    pub terminator: Terminator,
    /// Every SSA value used or defined in the block, in first-appearance
    /// order. Incoming operands of phis are not part of it: only the value
    /// selected by the taken edge is meaningful, and it is the phi result.
    pub state: Vec<ValueId>,
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Value(ValueId),
    /// Literal, already within the range of the type it is used at.
    Const(i128),
}

impl Operand {
    pub fn as_value(self) -> Option<ValueId> {
        match self {
            Operand::Value(v) => Some(v),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instruction {
    pub result: Option<ValueId>,
    pub kind: InstKind,
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Shl,
    Shr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcmpPred {
    Lt,
    Le,
    Eq,
    Ne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GepIndex {
    pub index: Operand,
    /// Byte stride the index is scaled by.
    pub stride: u64,
}

#[derive(Clone, Debug)]
pub enum InstKind {
    Const { ty: ScalarType, value: i128 },
    Binary { op: BinaryOp, ty: ScalarType, lhs: Operand, rhs: Operand },
    Unary { op: UnaryOp, ty: ScalarType, arg: Operand },
    Cast { to: ScalarType, arg: Operand },
    /// Result is a `u8` holding 0 or 1.
    Icmp { pred: IcmpPred, ty: ScalarType, lhs: Operand, rhs: Operand },
    Phi { ty: ScalarType, incoming: Vec<(Operand, BlockId)> },
    Load { ty: ScalarType, addr: Operand },
    Store { ty: ScalarType, addr: Operand, value: Operand },
    /// Address arithmetic: `base + Σ index·stride`, yielding a `ptr`.
    Gep { base: Operand, indices: Vec<GepIndex> },
    Call { ty: ScalarType, callee: FuncId, args: Vec<Operand> },
    /// Byte `index` of the fuzzer input, zero-extended then wrapped to `ty`.
    InputRead { ty: ScalarType, index: Operand },
    InputLen { ty: ScalarType },
}

impl InstKind {
    /// Operands in source order. Phi incoming values are included.
    pub fn operands(&self) -> Vec<Operand> {
        match self {
            InstKind::Const { .. } | InstKind::InputLen { .. } => vec![],
            InstKind::Binary { lhs, rhs, .. } | InstKind::Icmp { lhs, rhs, .. } => {
                vec![*lhs, *rhs]
            }
            InstKind::Unary { arg, .. } | InstKind::Cast { arg, .. } => vec![*arg],
            InstKind::Phi { incoming, .. } => incoming.iter().map(|(o, _)| *o).collect(),
            InstKind::Load { addr, .. } => vec![*addr],
            InstKind::Store { addr, value, .. } => vec![*addr, *value],
            InstKind::Gep { base, indices } => std::iter::once(*base)
                .chain(indices.iter().map(|i| i.index))
                .collect(),
            InstKind::Call { args, .. } => args.clone(),
            InstKind::InputRead { index, .. } => vec![*index],
        }
    }

    pub fn is_phi(&self) -> bool {
        matches!(self, InstKind::Phi { .. })
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            InstKind::Const { .. } => "const",
            InstKind::Binary { op, .. } => op.mnemonic(),
            InstKind::Unary { op: UnaryOp::Neg, .. } => "neg",
            InstKind::Unary { op: UnaryOp::Not, .. } => "not",
            InstKind::Cast { .. } => "cast",
            InstKind::Icmp { .. } => "icmp",
            InstKind::Phi { .. } => "phi",
            InstKind::Load { .. } => "load",
            InstKind::Store { .. } => "store",
            InstKind::Gep { .. } => "gep",
            InstKind::Call { .. } => "call",
            InstKind::InputRead { .. } => "input_read",
            InstKind::InputLen { .. } => "input_len",
        }
    }
}

impl BinaryOp {
    pub fn mnemonic(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::Rem => "rem",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Xor => "xor",
            BinaryOp::Shl => "shl",
            BinaryOp::Shr => "shr",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "add" => BinaryOp::Add,
            "sub" => BinaryOp::Sub,
            "mul" => BinaryOp::Mul,
            "div" => BinaryOp::Div,
            "rem" => BinaryOp::Rem,
            "and" => BinaryOp::And,
            "or" => BinaryOp::Or,
            "xor" => BinaryOp::Xor,
            "shl" => BinaryOp::Shl,
            "shr" => BinaryOp::Shr,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Terminator {
    pub kind: TermKind,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub enum TermKind {
    Ret { value: Operand },
    /// Non-zero `cond` takes `then_`.
    Br { cond: Operand, then_: BlockId, else_: BlockId },
    Jmp { target: BlockId },
    /// Planted fault: executing it aborts the run.
    Bug,
}

impl TermKind {
    pub fn successors(&self) -> Vec<BlockId> {
        match self {
            TermKind::Ret { .. } | TermKind::Bug => vec![],
            TermKind::Br { then_, else_, .. } => vec![*then_, *else_],
            TermKind::Jmp { target } => vec![*target],
        }
    }

    pub fn operands(&self) -> Vec<Operand> {
        match self {
            TermKind::Ret { value } => vec![*value],
            TermKind::Br { cond, .. } => vec![*cond],
            TermKind::Jmp { .. } | TermKind::Bug => vec![],
        }
    }
}
