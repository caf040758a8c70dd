//! Random well-formed programs for property tests and the acceptance suite.
//!
//! Generated programs are structured (straight-line code, if/else diamonds
//! with phis, counted loops, calls to helpers), always terminate, and only
//! fault by design when [`GenConfig::faults`] is set. `main` returns early on
//! inputs shorter than [`MIN_INPUT`] bytes; every input read uses an index
//! below that.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ir::{parse_program, Program};

/// Inputs shorter than this take the early return in `main`.
pub const MIN_INPUT: usize = 8;

const MEM_BASE: u32 = 512;
const TYPES: [&str; 4] = ["u8", "u32", "i32", "u64"];

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Upper bound on instructions per function, phis and guards included.
    pub max_insts: usize,
    pub helpers: usize,
    pub loops: bool,
    pub memory: bool,
    /// Allow unguarded divisions (possible div-by-zero faults).
    pub faults: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_insts: 40, helpers: 1, loops: true, memory: true, faults: false }
    }
}

/// Source text of a random program.
pub fn random_program_text<R: Rng>(rng: &mut R, cfg: &GenConfig) -> String {
    let seed: u32 = rng.gen();
    let mut out = format!("program entry=main seed={seed}\n");
    let mut helpers = Vec::new();
    for k in 0..cfg.helpers {
        let name = format!("h{k}");
        let f = FnGen::new(rng, cfg, &name, &[("a", "u32"), ("b", "u32")], &helpers);
        out.push('\n');
        out.push_str(&f.finish());
        helpers.push(name);
    }
    let f = FnGen::new(rng, cfg, "main", &[], &helpers);
    out.push('\n');
    out.push_str(&f.finish());
    out
}

/// A parsed random program; generation bugs panic with the offending text.
pub fn random_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Program {
    let text = random_program_text(rng, cfg);
    parse_program(&text).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{text}"))
}

/// A random input of `MIN_INPUT..=max_len` bytes, or occasionally a short one.
pub fn random_input<R: Rng>(rng: &mut R, max_len: usize) -> Vec<u8> {
    let len = if rng.gen_bool(0.05) {
        rng.gen_range(0..MIN_INPUT)
    } else {
        rng.gen_range(MIN_INPUT..=max_len.max(MIN_INPUT))
    };
    let mut v = vec![0u8; len];
    rng.fill(&mut v[..]);
    v
}

struct Block {
    label: String,
    lines: Vec<String>,
    term: Option<String>,
}

struct FnGen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    header: String,
    blocks: Vec<Block>,
    /// Values usable at the current point: (operand text, type).
    scope: Vec<(String, &'static str)>,
    next_value: usize,
    next_label: usize,
    insts: usize,
    /// Instructions promised to enclosing regions (phis, loop updates).
    reserved: usize,
    helpers: &'a [String],
    is_main: bool,
    depth: usize,
}

impl<'a, R: Rng> FnGen<'a, R> {
    fn new(
        rng: &'a mut R,
        cfg: &'a GenConfig,
        name: &str,
        params: &[(&str, &'static str)],
        helpers: &'a [String],
    ) -> Self {
        let ps: Vec<String> = params.iter().map(|(n, t)| format!("%{n}: {t}")).collect();
        let mut g = FnGen {
            rng,
            cfg,
            header: format!("fn @{name}({}) -> u32 {{\n", ps.join(", ")),
            blocks: vec![Block { label: "entry".into(), lines: vec![], term: None }],
            scope: params.iter().map(|(n, t)| (format!("%{n}"), *t)).collect(),
            next_value: 0,
            next_label: 0,
            insts: 0,
            reserved: 0,
            helpers,
            is_main: name == "main",
            depth: 0,
        };
        if g.is_main {
            g.emit_named("n", "input_len u32".into(), "u32");
            let short = g.fresh_value(false);
            g.push(format!("%{short} = icmp.lt u32 %n, {MIN_INPUT}"));
            let body = g.fresh_label();
            g.terminate(format!("br %{short}, short, {body}"));
            g.blocks.push(Block { label: "short".into(), lines: vec![], term: Some("ret u32 0".into()) });
            g.start(body);
        }
        g.body();
        let ret = g.operand("u32");
        g.terminate(format!("ret u32 {ret}"));
        g
    }

    fn finish(self) -> String {
        let mut s = self.header;
        for b in &self.blocks {
            s.push_str(&b.label);
            s.push_str(":\n");
            for l in &b.lines {
                s.push_str("  ");
                s.push_str(l);
                s.push('\n');
            }
            s.push_str("  ");
            s.push_str(b.term.as_deref().expect("every block is terminated"));
            s.push('\n');
        }
        s.push_str("}\n");
        s
    }

    fn room(&self, n: usize) -> bool {
        self.insts + self.reserved + n <= self.cfg.max_insts
    }

    fn fresh_value(&mut self, named: bool) -> String {
        self.next_value += 1;
        if named {
            format!("v{}", self.next_value)
        } else {
            format!("{}", self.next_value)
        }
    }

    fn fresh_label(&mut self) -> String {
        self.next_label += 1;
        format!("b{}", self.next_label)
    }

    fn current(&mut self) -> &mut Block {
        self.blocks.last_mut().unwrap()
    }

    fn current_label(&self) -> String {
        self.blocks.last().unwrap().label.clone()
    }

    fn push(&mut self, line: String) {
        self.insts += 1;
        self.current().lines.push(line);
    }

    fn terminate(&mut self, term: String) {
        let b = self.current();
        debug_assert!(b.term.is_none());
        b.term = Some(term);
    }

    fn start(&mut self, label: String) {
        self.blocks.push(Block { label, lines: vec![], term: None });
    }

    fn emit_named(&mut self, name: &str, rhs: String, ty: &'static str) -> String {
        self.push(format!("%{name} = {rhs}"));
        let v = format!("%{name}");
        self.scope.push((v.clone(), ty));
        v
    }

    /// Defines a new value, source-named about half the time.
    fn emit(&mut self, rhs: String, ty: &'static str) -> String {
        let named = self.rng.gen_bool(0.5);
        let name = self.fresh_value(named);
        self.emit_named(&name, rhs, ty)
    }

    fn literal(&mut self, ty: &str) -> String {
        let max: u32 = if ty == "u8" { 255 } else { 1000 };
        let v = match self.rng.gen_range(0..4) {
            0 => 0,
            1 => 1,
            _ => self.rng.gen_range(0..=max),
        };
        v.to_string()
    }

    fn value_of(&mut self, ty: &str) -> Option<String> {
        let cands: Vec<&String> = self.scope.iter().filter(|(_, t)| *t == ty).map(|(v, _)| v).collect();
        cands.choose(self.rng).map(|s| (*s).clone())
    }

    /// A value of `ty` from scope, or a literal.
    fn operand(&mut self, ty: &str) -> String {
        if self.rng.gen_bool(0.8) {
            if let Some(v) = self.value_of(ty) {
                return v;
            }
        }
        self.literal(ty)
    }

    /// A value operand of `ty`, materialised with `const` if none is in scope.
    fn value(&mut self, ty: &'static str) -> String {
        match self.value_of(ty) {
            Some(v) => v,
            None => {
                let lit = self.literal(ty);
                self.emit(format!("const {ty} {lit}"), ty)
            }
        }
    }

    fn any_type(&mut self) -> &'static str {
        TYPES[self.rng.gen_range(0..TYPES.len())]
    }

    fn body(&mut self) {
        while self.room(1) {
            let stop = self.rng.gen_bool(if self.depth == 0 { 0.05 } else { 0.2 });
            if stop {
                break;
            }
            match self.rng.gen_range(0..10) {
                0 | 1 if self.depth < 2 && self.room(4) => self.diamond(),
                2 if self.cfg.loops && self.depth < 2 && self.room(7) => self.counted_loop(),
                _ => self.straight(),
            }
        }
    }

    fn straight(&mut self) {
        let ty = self.any_type();
        let k = self.rng.gen_range(0..12);
        match k {
            0..=3 => {
                let ops = ["add", "sub", "mul", "and", "or", "xor", "shl", "shr"];
                let op = *ops.choose(self.rng).unwrap();
                let a = self.operand(ty);
                let b = self.operand(ty);
                self.emit(format!("{op} {ty} {a}, {b}"), ty);
            }
            4 if self.room(2) => {
                let op = if self.rng.gen() { "div" } else { "rem" };
                let a = self.operand(ty);
                let d = if self.cfg.faults {
                    self.operand(ty)
                } else {
                    let x = self.operand(ty);
                    self.emit(format!("or {ty} {x}, 1"), ty)
                };
                self.emit(format!("{op} {ty} {a}, {d}"), ty);
            }
            5 => {
                let op = if self.rng.gen() { "neg" } else { "not" };
                let a = self.operand(ty);
                self.emit(format!("{op} {ty} {a}"), ty);
            }
            6 if self.room(2) => {
                let from = self.any_type();
                let v = self.value(from);
                self.emit(format!("cast {ty} {v}"), ty);
            }
            7 => {
                let preds = ["lt", "le", "eq", "ne"];
                let p = *preds.choose(self.rng).unwrap();
                let a = self.operand(ty);
                let b = self.operand(ty);
                self.emit(format!("icmp.{p} {ty} {a}, {b}"), "u8");
            }
            8 if self.is_main || !self.helpers.is_empty() || self.depth > 0 => self.read(ty),
            9 if self.cfg.memory && self.room(4) => self.memory(ty),
            10 if self.is_main && !self.helpers.is_empty() => {
                let h = self.helpers.choose(self.rng).unwrap().clone();
                let a = self.operand("u32");
                let b = self.operand("u32");
                self.emit(format!("call u32 @{h}({a}, {b})"), "u32");
            }
            _ => self.read(ty),
        }
    }

    fn read(&mut self, ty: &'static str) {
        let idx = self.rng.gen_range(0..MIN_INPUT);
        self.emit(format!("input_read {ty} {idx}"), ty);
    }

    fn memory(&mut self, ty: &'static str) {
        let ty = if ty == "u64" { "u32" } else { ty };
        let base = self.value_of("ptr").unwrap_or_else(|| {
            let name = self.fresh_value(true);
            self.emit_named(&name, format!("const ptr {MEM_BASE}"), "ptr")
        });
        let idx = self.operand("u32");
        let masked = self.emit(format!("and u32 {idx}, 63"), "u32");
        let p = self.emit(format!("gep {base}, {masked}:1"), "ptr");
        if self.rng.gen() {
            let v = self.operand(ty);
            self.push(format!("store {ty} {p}, {v}"));
        } else {
            self.emit(format!("load {ty} {p}"), ty);
        }
    }

    fn diamond(&mut self) {
        let ty = self.any_type();
        let a = self.operand(ty);
        let b = self.operand(ty);
        let c = self.emit(format!("icmp.lt {ty} {a}, {b}"), "u8");
        let (then_l, else_l, join_l) = (self.fresh_label(), self.fresh_label(), self.fresh_label());
        self.terminate(format!("br {c}, {then_l}, {else_l}"));

        let outer = self.scope.len();
        let phi_ty = self.any_type();
        self.depth += 1;
        self.reserved += 1;
        let mut arms = Vec::new();
        for label in [then_l, else_l] {
            self.start(label);
            self.body();
            let v = self.operand(phi_ty);
            arms.push((v, self.current_label()));
            self.terminate(format!("jmp {join_l}"));
            self.scope.truncate(outer);
        }
        self.depth -= 1;
        self.reserved -= 1;
        self.start(join_l);
        let incoming: Vec<String> = arms.iter().map(|(v, l)| format!("[{v}, {l}]")).collect();
        self.emit(format!("phi {phi_ty} {}", incoming.join(", ")), phi_ty);
    }

    fn counted_loop(&mut self) {
        let trips = self.rng.gen_range(1..=4);
        let init = self.operand("u32");
        let pre = self.current_label();
        let (head, body, exit) = (self.fresh_label(), self.fresh_label(), self.fresh_label());
        self.terminate(format!("jmp {head}"));

        let i = self.fresh_value(true);
        let (named_acc, named_acc2) = (self.rng.gen(), self.rng.gen());
        let acc = self.fresh_value(named_acc);
        let i2 = self.fresh_value(false);
        let acc2 = self.fresh_value(named_acc2);
        self.start(head);
        // Back-edge labels are only known after the body; patched below.
        let phi_at = self.current().lines.len();
        self.push(String::new());
        self.push(String::new());
        self.scope.push((format!("%{i}"), "u32"));
        self.scope.push((format!("%{acc}"), "u32"));
        let c = self.emit(format!("icmp.lt u32 %{i}, {trips}"), "u8");
        self.terminate(format!("br {c}, {body}, {exit}"));
        let head_idx = self.blocks.len() - 1;
        let outer = self.scope.len();

        self.start(body);
        self.depth += 1;
        self.reserved += 2;
        self.body();
        self.reserved -= 2;
        self.depth -= 1;
        let x = self.operand("u32");
        self.emit_named(&acc2, format!("add u32 %{acc}, {x}"), "u32");
        self.emit_named(&i2, format!("add u32 %{i}, 1"), "u32");
        let latch = self.current_label();
        self.terminate(format!("jmp {}", self.blocks[head_idx].label));
        self.scope.truncate(outer);

        let h = &mut self.blocks[head_idx];
        h.lines[phi_at] = format!("%{i} = phi u32 [0, {pre}], [%{i2}, {latch}]");
        h.lines[phi_at + 1] = format!("%{acc} = phi u32 [{init}, {pre}], [%{acc2}, {latch}]");
        self.start(exit);
    }
}
