//! Line-based parser for the textual IR.
//!
//! Structural errors (malformed header, unbalanced function braces) abort with
//! [`IrError::Parse`]. Per-line problems (unknown opcodes, SSA violations,
//! type mismatches, misplaced phis) are collected and returned together as
//! [`IrError::Validation`].

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::validate::validate_program;
use super::{
    BasicBlock, BinaryOp, BlockId, Diagnostic, FuncId, Function, GepIndex, IcmpPred, InstKind,
    Instruction, IrError, Operand, Program, ScalarType, TermKind, Terminator, UnaryOp, ValueDef,
    ValueId, ValueInfo,
};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Local(String),
    Global(String),
    Ident(String),
    Int(i128),
    Sym(char),
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Local(n) => format!("%{n}"),
            Tok::Global(n) => format!("@{n}"),
            Tok::Ident(n) => n.clone(),
            Tok::Int(v) => v.to_string(),
            Tok::Sym(c) => c.to_string(),
            Tok::Arrow => "->".into(),
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(line: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let take_name = |i: &mut usize| {
        let start = *i;
        while *i < chars.len() && is_name_char(chars[*i]) {
            *i += 1;
        }
        chars[start..*i].iter().collect::<String>()
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '%' | '@' => {
                i += 1;
                let name = take_name(&mut i);
                if name.is_empty() {
                    return Err(format!("expected a name after '{c}'"));
                }
                toks.push(if c == '%' { Tok::Local(name) } else { Tok::Global(name) });
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                toks.push(Tok::Arrow);
                i += 2;
            }
            '-' | '0'..='9' => {
                let neg = c == '-';
                if neg {
                    i += 1;
                }
                let text = take_name(&mut i);
                let magnitude = if let Some(hex) = text.strip_prefix("0x") {
                    i128::from_str_radix(hex, 16)
                } else {
                    text.parse::<i128>()
                }
                .map_err(|_| format!("malformed integer literal '{text}'"))?;
                toks.push(Tok::Int(if neg { -magnitude } else { magnitude }));
            }
            '=' | ',' | '(' | ')' | '[' | ']' | ':' | '{' | '}' => {
                toks.push(Tok::Sym(c));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                toks.push(Tok::Ident(take_name(&mut i)));
            }
            other => return Err(format!("unexpected character '{other}'")),
        }
    }
    Ok(toks)
}

/// Cursor over the tokens of one line.
struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Tok]) -> Self {
        Cursor { toks, pos: 0 }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_sym(&mut self, c: char) -> Result<(), String> {
        match self.next() {
            Some(Tok::Sym(s)) if *s == c => Ok(()),
            Some(t) => Err(format!("expected '{c}', found '{}'", t.describe())),
            None => Err(format!("expected '{c}' at end of line")),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<&'a str, String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => Err(format!("expected an identifier, found '{}'", t.describe())),
            None => Err("expected an identifier at end of line".into()),
        }
    }

    fn ty(&mut self) -> Result<ScalarType, String> {
        let name = self.ident()?;
        name.parse().map_err(|_| format!("unknown type '{name}'"))
    }

    fn int(&mut self) -> Result<i128, String> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(*v),
            Some(t) => Err(format!("expected an integer, found '{}'", t.describe())),
            None => Err("expected an integer at end of line".into()),
        }
    }

    fn finish(&self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected trailing token '{}'", t.describe())),
        }
    }
}

struct Line {
    number: usize,
    toks: Vec<Tok>,
}

struct RawFunction {
    name: String,
    params: Vec<(String, ScalarType)>,
    ret_ty: ScalarType,
    line: usize,
    body: Vec<Line>,
}

struct Signature {
    id: FuncId,
    params: Vec<ScalarType>,
    ret_ty: ScalarType,
}

/// Parses and validates IR source text.
pub fn parse_program(text: &str) -> Result<Program, IrError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let code = raw.split(';').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let toks = lex(code).map_err(|message| IrError::Parse { line: number, message })?;
        lines.push(Line { number, toks });
    }

    let mut iter = lines.into_iter();
    let header = iter.next().ok_or(IrError::Parse {
        line: 1,
        message: "empty source: expected 'program entry=<name> seed=<n>'".into(),
    })?;
    let (entry_name, seed) = parse_header(&header)?;

    let mut raw_functions = Vec::new();
    while let Some(line) = iter.next() {
        let (name, params, ret_ty) = parse_fn_header(&line)?;
        let mut body = Vec::new();
        let mut closed = false;
        for l in iter.by_ref() {
            if l.toks == [Tok::Sym('}')] {
                closed = true;
                break;
            }
            body.push(l);
        }
        if !closed {
            return Err(IrError::Parse {
                line: line.number,
                message: format!("function @{name} is missing its closing '}}'"),
            });
        }
        raw_functions.push(RawFunction { name, params, ret_ty, line: line.number, body });
    }

    let mut diags = Vec::new();
    let mut sigs: HashMap<String, Signature> = HashMap::new();
    for (i, f) in raw_functions.iter().enumerate() {
        if sigs.contains_key(&f.name) {
            diags.push(Diagnostic {
                line: f.line,
                message: format!("function @{} defined more than once", f.name),
            });
            continue;
        }
        sigs.insert(
            f.name.clone(),
            Signature {
                id: FuncId(i as u32),
                params: f.params.iter().map(|p| p.1).collect(),
                ret_ty: f.ret_ty,
            },
        );
    }
    let entry = match sigs.get(&entry_name) {
        Some(s) => s.id,
        None => {
            diags.push(Diagnostic {
                line: header.number,
                message: format!("entry function @{entry_name} is not defined"),
            });
            FuncId(0)
        }
    };

    let functions: Vec<Function> = raw_functions
        .iter()
        .map(|raw| FunctionBuilder::new(raw, &sigs, &mut diags).build())
        .collect();

    let mut program = Program { functions, entry, seed };
    if diags.is_empty() {
        validate_program(&program, &mut diags);
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| d.line);
        return Err(IrError::Validation(diags));
    }
    assign_locations(&mut program);
    Ok(program)
}

/// Draws one distinct 16-bit location per block from the program seed.
fn assign_locations(program: &mut Program) {
    let total = program.block_count();
    let mut rng = ChaCha8Rng::seed_from_u64(program.seed);
    let locs = sample(&mut rng, 1 << 16, total.min(1 << 16));
    let mut next = locs.into_iter();
    for f in &mut program.functions {
        for b in &mut f.blocks {
            // More than 2^16 blocks cannot all be distinct; wrap around.
            b.loc = next.next().unwrap_or(b.id.0 as usize) as u16;
        }
    }
}

fn parse_header(line: &Line) -> Result<(String, u64), IrError> {
    let err = |message: String| IrError::Parse { line: line.number, message };
    let mut c = Cursor::new(&line.toks);
    if c.ident().ok() != Some("program") {
        return Err(err("expected header 'program entry=<name> seed=<n>'".into()));
    }
    let mut entry = None;
    let mut seed = None;
    while !c.at_end() {
        let key = c.ident().map_err(err)?;
        c.expect_sym('=').map_err(err)?;
        match key {
            "entry" => {
                entry = Some(match c.next() {
                    Some(Tok::Ident(n)) | Some(Tok::Global(n)) => n.clone(),
                    _ => return Err(err("expected a function name after 'entry='".into())),
                })
            }
            "seed" => {
                let v = c.int().map_err(err)?;
                seed = Some(u64::try_from(v).map_err(|_| err("seed must fit in u64".into()))?);
            }
            other => return Err(err(format!("unknown header key '{other}'"))),
        }
    }
    Ok((
        entry.ok_or_else(|| err("header is missing 'entry='".into()))?,
        seed.ok_or_else(|| err("header is missing 'seed='".into()))?,
    ))
}

type FnHeader = (String, Vec<(String, ScalarType)>, ScalarType);

fn parse_fn_header(line: &Line) -> Result<FnHeader, IrError> {
    let err = |message: String| IrError::Parse { line: line.number, message };
    let mut c = Cursor::new(&line.toks);
    if c.ident().ok() != Some("fn") {
        return Err(err(format!(
            "expected 'fn @name(...) -> <type> {{', found '{}'",
            line.toks.first().map(Tok::describe).unwrap_or_default()
        )));
    }
    let name = match c.next() {
        Some(Tok::Global(n)) => n.clone(),
        _ => return Err(err("expected '@name' after 'fn'".into())),
    };
    c.expect_sym('(').map_err(err)?;
    let mut params = Vec::new();
    if !c.eat_sym(')') {
        loop {
            let pname = match c.next() {
                Some(Tok::Local(n)) => n.clone(),
                _ => return Err(err("expected a '%name' parameter".into())),
            };
            c.expect_sym(':').map_err(err)?;
            params.push((pname, c.ty().map_err(err)?));
            if c.eat_sym(')') {
                break;
            }
            c.expect_sym(',').map_err(err)?;
        }
    }
    if c.next() != Some(&Tok::Arrow) {
        return Err(err("expected '->' and a return type".into()));
    }
    let ret_ty = c.ty().map_err(err)?;
    c.expect_sym('{').map_err(err)?;
    c.finish().map_err(err)?;
    Ok((name, params, ret_ty))
}

/// Result type of a defining instruction, derived from its leading tokens.
fn result_type(c: &mut Cursor<'_>) -> Result<ScalarType, String> {
    let opcode = c.ident()?;
    let base = opcode.split('.').next().unwrap_or(opcode);
    match base {
        "icmp" => Ok(ScalarType::U8),
        "gep" => Ok(ScalarType::Ptr),
        "const" | "add" | "sub" | "mul" | "div" | "rem" | "and" | "or" | "xor" | "shl" | "shr"
        | "neg" | "not" | "cast" | "phi" | "load" | "call" | "input_read" | "input_len" => c.ty(),
        "store" | "ret" | "br" | "jmp" | "bug" => {
            Err(format!("'{opcode}' does not produce a value"))
        }
        _ => Err(format!("unknown opcode '{opcode}'")),
    }
}

struct FunctionBuilder<'a> {
    raw: &'a RawFunction,
    sigs: &'a HashMap<String, Signature>,
    diags: &'a mut Vec<Diagnostic>,
    values: Vec<ValueInfo>,
    names: HashMap<String, ValueId>,
    labels: HashMap<String, BlockId>,
}

impl<'a> FunctionBuilder<'a> {
    fn new(
        raw: &'a RawFunction,
        sigs: &'a HashMap<String, Signature>,
        diags: &'a mut Vec<Diagnostic>,
    ) -> Self {
        FunctionBuilder {
            raw,
            sigs,
            diags,
            values: Vec::new(),
            names: HashMap::new(),
            labels: HashMap::new(),
        }
    }

    fn diag(&mut self, line: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic { line, message: message.into() });
    }

    fn define(&mut self, name: &str, ty: ScalarType, def: ValueDef, line: usize) -> ValueId {
        if self.names.contains_key(name) {
            self.diag(
                line,
                format!(
                    "value %{name} in @{} is assigned more than once; SSA values are assigned only once",
                    self.raw.name
                ),
            );
        }
        let id = ValueId(self.values.len() as u32);
        self.values.push(ValueInfo { name: name.to_string(), ty, def });
        self.names.entry(name.to_string()).or_insert(id);
        id
    }

    fn build(mut self) -> Function {
        let raw = self.raw;
        let params: Vec<ValueId> = raw
            .params
            .iter()
            .enumerate()
            .map(|(i, (n, ty))| self.define(n, *ty, ValueDef::Param(i), raw.line))
            .collect();

        // Group lines into blocks.
        struct RawBlock<'l> {
            label: String,
            line: usize,
            insts: Vec<&'l Line>,
            term: Option<&'l Line>,
        }
        let mut blocks: Vec<RawBlock<'_>> = Vec::new();
        for line in &raw.body {
            if let [Tok::Ident(label), Tok::Sym(':')] = line.toks.as_slice() {
                if self.labels.contains_key(label) {
                    self.diag(line.number, format!("duplicate block label '{label}'"));
                } else {
                    self.labels.insert(label.clone(), BlockId(blocks.len() as u32));
                }
                blocks.push(RawBlock { label: label.clone(), line: line.number, insts: vec![], term: None });
                continue;
            }
            let Some(block) = blocks.last_mut() else {
                self.diag(line.number, "instruction outside of any block (missing label)");
                continue;
            };
            let is_term = matches!(line.toks.first(), Some(Tok::Ident(op)) if matches!(op.as_str(), "ret" | "br" | "jmp" | "bug"));
            if block.term.is_some() {
                let label = block.label.clone();
                self.diag(
                    line.number,
                    format!("instruction after the terminator of block '{label}'"),
                );
            } else if is_term {
                block.term = Some(line);
            } else {
                block.insts.push(line);
            }
        }
        if blocks.is_empty() {
            self.diag(
                raw.line,
                format!("function @{} has an empty body: missing terminator", raw.name),
            );
        }

        // Register every defined name first so phis may refer forward.
        let mut defined: Vec<Vec<Option<ValueId>>> = Vec::new();
        for (bi, b) in blocks.iter().enumerate() {
            let mut row = Vec::new();
            for (ii, line) in b.insts.iter().enumerate() {
                let mut c = Cursor::new(&line.toks);
                let id = match (c.next(), c.next()) {
                    (Some(Tok::Local(name)), Some(Tok::Sym('='))) => {
                        let ty = match result_type(&mut c) {
                            Ok(ty) => ty,
                            Err(_) => ScalarType::I64, // reported when the line is parsed
                        };
                        let def = ValueDef::Inst { block: BlockId(bi as u32), index: ii };
                        Some(self.define(name, ty, def, line.number))
                    }
                    _ => None,
                };
                row.push(id);
            }
            defined.push(row);
        }

        let mut built = Vec::new();
        for (bi, b) in blocks.iter().enumerate() {
            let mut instructions = Vec::new();
            for (ii, line) in b.insts.iter().enumerate() {
                match self.instruction(line, defined[bi][ii]) {
                    Ok(inst) => instructions.push(inst),
                    Err(msg) => self.diag(line.number, msg),
                }
            }
            let terminator = match b.term {
                Some(line) => match self.terminator(line) {
                    Ok(t) => t,
                    Err(msg) => {
                        self.diag(line.number, msg);
                        Terminator { kind: TermKind::Bug, line: line.number }
                    }
                },
                None => {
                    let label = b.label.clone();
                    self.diag(b.line, format!("block '{label}' is missing a terminator"));
                    Terminator { kind: TermKind::Bug, line: b.line }
                }
            };
            built.push(BasicBlock {
                id: BlockId(bi as u32),
                label: b.label.clone(),
                loc: 0,
                instructions,
                terminator,
                state: Vec::new(),
                line: b.line,
            });
        }
        for b in &mut built {
            b.state = block_state(b);
        }

        Function {
            name: raw.name.clone(),
            params,
            ret_ty: raw.ret_ty,
            blocks: built,
            values: self.values,
            line: raw.line,
        }
    }

    fn operand(&self, tok: Option<&Tok>, ty: ScalarType) -> Result<Operand, String> {
        match tok {
            Some(Tok::Local(name)) => {
                let id = *self
                    .names
                    .get(name)
                    .ok_or_else(|| format!("use of undefined value %{name}"))?;
                let actual = self.values[id.index()].ty;
                if actual != ty {
                    return Err(format!("type mismatch: %{name} is {actual}, expected {ty}"));
                }
                Ok(Operand::Value(id))
            }
            Some(Tok::Int(v)) => {
                if !ty.contains(*v) {
                    return Err(format!("literal {v} does not fit in {ty}"));
                }
                Ok(Operand::Const(*v))
            }
            Some(t) => Err(format!("expected an operand, found '{}'", t.describe())),
            None => Err("expected an operand at end of line".into()),
        }
    }

    /// Operand of any integer type (cast sources, indexes, branch conditions).
    fn any_operand(&self, tok: Option<&Tok>, literal_ty: ScalarType) -> Result<Operand, String> {
        match tok {
            Some(Tok::Local(name)) => {
                let id = *self
                    .names
                    .get(name)
                    .ok_or_else(|| format!("use of undefined value %{name}"))?;
                Ok(Operand::Value(id))
            }
            other => self.operand(other, literal_ty),
        }
    }

    fn label(&self, tok: Option<&Tok>) -> Result<BlockId, String> {
        match tok {
            Some(Tok::Ident(l)) => {
                self.labels.get(l).copied().ok_or_else(|| format!("unknown block label '{l}'"))
            }
            Some(t) => Err(format!("expected a block label, found '{}'", t.describe())),
            None => Err("expected a block label at end of line".into()),
        }
    }

    fn instruction(&self, line: &Line, result: Option<ValueId>) -> Result<Instruction, String> {
        let mut c = Cursor::new(&line.toks);
        if result.is_some() {
            c.pos = 2;
        }
        let opcode = c.ident()?;
        let (base, pred) = match opcode.split_once('.') {
            Some((b, p)) => (b, Some(p)),
            None => (opcode, None),
        };
        if pred.is_some() && base != "icmp" {
            return Err(format!("unknown opcode '{opcode}'"));
        }
        let kind = match base {
            "const" => {
                let ty = c.ty()?;
                let v = c.int()?;
                if !ty.contains(v) {
                    return Err(format!("literal {v} does not fit in {ty}"));
                }
                InstKind::Const { ty, value: v }
            }
            "neg" | "not" => {
                let ty = c.ty()?;
                let arg = self.operand(c.next(), ty)?;
                let op = if base == "neg" { UnaryOp::Neg } else { UnaryOp::Not };
                InstKind::Unary { op, ty, arg }
            }
            "cast" => {
                let to = c.ty()?;
                let arg = match c.next() {
                    Some(Tok::Local(n)) => Operand::Value(
                        *self.names.get(n).ok_or_else(|| format!("use of undefined value %{n}"))?,
                    ),
                    _ => return Err("cast operand must be a value".into()),
                };
                InstKind::Cast { to, arg }
            }
            "icmp" => {
                let pred = match pred {
                    Some("lt") => IcmpPred::Lt,
                    Some("le") => IcmpPred::Le,
                    Some("eq") => IcmpPred::Eq,
                    Some("ne") => IcmpPred::Ne,
                    Some(p) => return Err(format!("unknown icmp predicate '{p}'")),
                    None => return Err("icmp needs a predicate: icmp.lt/le/eq/ne".into()),
                };
                let ty = c.ty()?;
                let lhs = self.operand(c.next(), ty)?;
                c.expect_sym(',')?;
                let rhs = self.operand(c.next(), ty)?;
                InstKind::Icmp { pred, ty, lhs, rhs }
            }
            "phi" => {
                let ty = c.ty()?;
                let mut incoming = Vec::new();
                loop {
                    c.expect_sym('[')?;
                    let v = self.operand(c.next(), ty)?;
                    c.expect_sym(',')?;
                    let b = self.label(c.next())?;
                    c.expect_sym(']')?;
                    incoming.push((v, b));
                    if !c.eat_sym(',') {
                        break;
                    }
                }
                InstKind::Phi { ty, incoming }
            }
            "load" => {
                let ty = c.ty()?;
                let addr = self.operand(c.next(), ScalarType::Ptr)?;
                InstKind::Load { ty, addr }
            }
            "store" => {
                let ty = c.ty()?;
                let addr = self.operand(c.next(), ScalarType::Ptr)?;
                c.expect_sym(',')?;
                let value = self.operand(c.next(), ty)?;
                InstKind::Store { ty, addr, value }
            }
            "gep" => {
                let base = self.operand(c.next(), ScalarType::Ptr)?;
                let mut indices = Vec::new();
                while c.eat_sym(',') {
                    let index = self.any_operand(c.next(), ScalarType::I64)?;
                    c.expect_sym(':')?;
                    let stride = c.int()?;
                    let stride = u64::try_from(stride)
                        .map_err(|_| format!("gep stride {stride} must be non-negative"))?;
                    indices.push(GepIndex { index, stride });
                }
                if indices.is_empty() {
                    return Err("gep needs at least one 'index:stride' operand".into());
                }
                InstKind::Gep { base, indices }
            }
            "call" => {
                let ty = c.ty()?;
                let callee = match c.next() {
                    Some(Tok::Global(n)) => n,
                    _ => return Err("expected '@callee' in call".into()),
                };
                let sig = self
                    .sigs
                    .get(callee)
                    .ok_or_else(|| format!("call to undefined function @{callee}"))?;
                if sig.ret_ty != ty {
                    return Err(format!("@{callee} returns {}, call expects {ty}", sig.ret_ty));
                }
                c.expect_sym('(')?;
                let mut args = Vec::new();
                if !c.eat_sym(')') {
                    loop {
                        let pty = *sig.params.get(args.len()).ok_or_else(|| {
                            format!("too many arguments in call to @{callee}")
                        })?;
                        args.push(self.operand(c.next(), pty)?);
                        if c.eat_sym(')') {
                            break;
                        }
                        c.expect_sym(',')?;
                    }
                }
                if args.len() != sig.params.len() {
                    return Err(format!(
                        "@{callee} takes {} arguments, {} given",
                        sig.params.len(),
                        args.len()
                    ));
                }
                InstKind::Call { ty, callee: sig.id, args }
            }
            "input_read" => {
                let ty = c.ty()?;
                let index = self.any_operand(c.next(), ScalarType::U64)?;
                InstKind::InputRead { ty, index }
            }
            "input_len" => InstKind::InputLen { ty: c.ty()? },
            _ => {
                if let Some(op) = BinaryOp::from_mnemonic(base) {
                    let ty = c.ty()?;
                    let lhs = self.operand(c.next(), ty)?;
                    c.expect_sym(',')?;
                    let rhs = self.operand(c.next(), ty)?;
                    InstKind::Binary { op, ty, lhs, rhs }
                } else {
                    return Err(format!("unknown opcode '{opcode}'"));
                }
            }
        };
        c.finish()?;
        match (&kind, result) {
            (InstKind::Store { .. }, Some(_)) => Err("store does not produce a value".into()),
            (InstKind::Store { .. }, None) => Ok(Instruction { result, kind, line: line.number }),
            (_, None) => Err(format!("'{opcode}' result must be assigned to a %value")),
            (_, Some(_)) => Ok(Instruction { result, kind, line: line.number }),
        }
    }

    fn terminator(&self, line: &Line) -> Result<Terminator, String> {
        let mut c = Cursor::new(&line.toks);
        let kind = match c.ident()? {
            "ret" => {
                let ty = c.ty()?;
                if ty != self.raw.ret_ty {
                    return Err(format!(
                        "ret {ty} in @{} which returns {}",
                        self.raw.name, self.raw.ret_ty
                    ));
                }
                TermKind::Ret { value: self.operand(c.next(), ty)? }
            }
            "br" => {
                let cond = self.any_operand(c.next(), ScalarType::U8)?;
                c.expect_sym(',')?;
                let then_ = self.label(c.next())?;
                c.expect_sym(',')?;
                let else_ = self.label(c.next())?;
                TermKind::Br { cond, then_, else_ }
            }
            "jmp" => TermKind::Jmp { target: self.label(c.next())? },
            "bug" => TermKind::Bug,
            other => return Err(format!("unknown terminator '{other}'")),
        };
        c.finish()?;
        Ok(Terminator { kind, line: line.number })
    }
}

fn block_state(block: &BasicBlock) -> Vec<ValueId> {
    let mut seen = Vec::new();
    let push = |v: ValueId, seen: &mut Vec<ValueId>| {
        if !seen.contains(&v) {
            seen.push(v);
        }
    };
    for inst in &block.instructions {
        if !inst.kind.is_phi() {
            for op in inst.kind.operands() {
                if let Operand::Value(v) = op {
                    push(v, &mut seen);
                }
            }
        }
        if let Some(r) = inst.result {
            push(r, &mut seen);
        }
    }
    for op in block.terminator.kind.operands() {
        if let Operand::Value(v) = op {
            push(v, &mut seen);
        }
    }
    seen
}
