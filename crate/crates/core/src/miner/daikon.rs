//! Daikon-compatible `decls` (version 2) and `dtrace` text files.
//!
//! Every basic block is a program point with an `ENTER` and an `EXIT0` side
//! carrying the same variables; a block execution is logged once on each side
//! with identical values.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::trace::BlockStateRecord;
use crate::analysis::ProgramAnalysis;
use crate::ir::{BlockId, FuncId, Program};

#[derive(Debug, Error)]
pub enum TraceFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> TraceFormatError {
    TraceFormatError::Syntax { line, message: message.into() }
}

pub fn write_decls(p: &Program, analysis: &ProgramAnalysis) -> String {
    let mut s = String::from("decl-version 2.0\nvar-comparability implicit\n");
    for fid in p.func_ids() {
        let f = p.func(fid);
        let fa = analysis.func(fid);
        for b in f.block_ids() {
            let ppt = f.ppt_name(b);
            for (side, kind) in [("ENTER", "enter"), ("EXIT0", "subexit")] {
                let _ = write!(s, "\nppt {ppt}:::{side}\nppt-type {kind}\n");
                for &v in fa.dump.block(b) {
                    let comp = fa.comparability.class(v).map_or(-1, i64::from);
                    let _ = write!(
                        s,
                        "variable {}\n  var-kind variable\n  rep-type int\n  dec-type {}\n  comparability {comp}\n",
                        f.value_name(v),
                        f.value(v).ty
                    );
                }
            }
        }
    }
    s
}

/// One program point as read back from a decls file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclPpt {
    pub name: String,
    pub kind: String,
    pub vars: Vec<DeclVar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclVar {
    pub name: String,
    pub dec_type: String,
    pub comparability: i64,
}

pub fn parse_decls(text: &str) -> Result<Vec<DeclPpt>, TraceFormatError> {
    let mut ppts: Vec<DeclPpt> = Vec::new();
    let mut saw_version = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, rest) = t.split_once(' ').unwrap_or((t, ""));
        match key {
            "decl-version" => {
                if rest != "2.0" {
                    return Err(syntax(line, format!("unsupported decl-version {rest}")));
                }
                saw_version = true;
            }
            "var-comparability" | "input-language" => {}
            "ppt" => ppts.push(DeclPpt { name: rest.to_string(), kind: String::new(), vars: vec![] }),
            "ppt-type" => last(&mut ppts, line)?.kind = rest.to_string(),
            "variable" => last(&mut ppts, line)?.vars.push(DeclVar {
                name: rest.to_string(),
                dec_type: String::new(),
                comparability: -1,
            }),
            "var-kind" | "rep-type" | "flags" | "enclosing-var" => {}
            "dec-type" => last_var(&mut ppts, line)?.dec_type = rest.to_string(),
            "comparability" => {
                last_var(&mut ppts, line)?.comparability =
                    rest.parse().map_err(|_| syntax(line, "bad comparability"))?
            }
            other => return Err(syntax(line, format!("unknown decls record `{other}`"))),
        }
    }
    if !saw_version {
        return Err(syntax(1, "missing decl-version"));
    }
    Ok(ppts)
}

fn last(ppts: &mut [DeclPpt], line: usize) -> Result<&mut DeclPpt, TraceFormatError> {
    ppts.last_mut().ok_or_else(|| syntax(line, "record outside a ppt"))
}

fn last_var(ppts: &mut [DeclPpt], line: usize) -> Result<&mut DeclVar, TraceFormatError> {
    last(ppts, line)?.vars.last_mut().ok_or_else(|| syntax(line, "record outside a variable"))
}

/// Appends one block execution (ENTER and EXIT0 entries) to a dtrace stream.
pub fn write_dtrace_record<W: Write>(
    w: &mut W,
    p: &Program,
    analysis: &ProgramAnalysis,
    rec: &BlockStateRecord,
) -> io::Result<()> {
    let f = p.func(rec.function);
    let vars = analysis.func(rec.function).dump.block(rec.block);
    let ppt = f.ppt_name(rec.block);
    for side in ["ENTER", "EXIT0"] {
        writeln!(w, "{ppt}:::{side}\nthis_invocation_nonce\n{}", rec.nonce)?;
        for (v, val) in vars.iter().zip(&rec.values) {
            writeln!(w, "{}\n{val}\n1", f.value_name(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Streams [`BlockStateRecord`]s back out of dtrace text. Only `EXIT0`
/// entries are yielded; `ENTER` entries are checked for shape and skipped.
pub struct DtraceReader<'p, R> {
    reader: R,
    line: usize,
    ppts: HashMap<String, (FuncId, BlockId)>,
    program: &'p Program,
    analysis: &'p ProgramAnalysis,
}

impl<'p, R: BufRead> DtraceReader<'p, R> {
    pub fn new(reader: R, program: &'p Program, analysis: &'p ProgramAnalysis) -> Self {
        let mut ppts = HashMap::new();
        for fid in program.func_ids() {
            let f = program.func(fid);
            for b in f.block_ids() {
                ppts.insert(f.ppt_name(b), (fid, b));
            }
        }
        DtraceReader { reader, line: 0, ppts, program, analysis }
    }

    fn read_line(&mut self) -> Result<Option<String>, TraceFormatError> {
        let mut s = String::new();
        if self.reader.read_line(&mut s)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        Ok(Some(s.trim_end_matches(['\n', '\r']).to_string()))
    }

    fn expect_line(&mut self) -> Result<String, TraceFormatError> {
        self.read_line()?.ok_or_else(|| syntax(self.line, "unexpected end of dtrace"))
    }

    fn read_entry(&mut self) -> Result<Option<(bool, BlockStateRecord)>, TraceFormatError> {
        let header = loop {
            match self.read_line()? {
                None => return Ok(None),
                Some(l) if l.trim().is_empty() || l.starts_with('#') => continue,
                Some(l) => break l,
            }
        };
        let start = self.line;
        let (ppt, side) = header
            .rsplit_once(":::")
            .ok_or_else(|| syntax(start, format!("expected a ppt name, got `{header}`")))?;
        let exit = match side {
            "ENTER" => false,
            "EXIT0" => true,
            _ => return Err(syntax(start, format!("unknown ppt side `{side}`"))),
        };
        let &(function, block) = self
            .ppts
            .get(ppt)
            .ok_or_else(|| syntax(start, format!("unknown program point `{ppt}`")))?;
        if self.expect_line()? != "this_invocation_nonce" {
            return Err(syntax(self.line, "expected this_invocation_nonce"));
        }
        let nonce = self.expect_line()?.trim().parse().map_err(|_| syntax(self.line, "bad nonce"))?;
        let f = self.program.func(function);
        let vars = self.analysis.func(function).dump.block(block);
        let mut values = Vec::with_capacity(vars.len());
        for &v in vars {
            let name = self.expect_line()?;
            if name != f.value_name(v) {
                return Err(syntax(
                    self.line,
                    format!("expected variable `{}`, got `{name}`", f.value_name(v)),
                ));
            }
            let val = self.expect_line()?;
            values.push(val.trim().parse().map_err(|_| syntax(self.line, "bad value"))?);
            self.expect_line()?;
        }
        match self.read_line()? {
            None => {}
            Some(l) if l.trim().is_empty() => {}
            Some(l) => return Err(syntax(self.line, format!("unexpected `{l}` after entry"))),
        }
        Ok(Some((exit, BlockStateRecord { function, block, nonce, values })))
    }
}

impl<R: BufRead> Iterator for DtraceReader<'_, R> {
    type Item = Result<BlockStateRecord, TraceFormatError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.read_entry() {
                Ok(None) => return None,
                Ok(Some((true, rec))) => return Some(Ok(rec)),
                Ok(Some((false, _))) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}
