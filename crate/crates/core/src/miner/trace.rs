use std::collections::VecDeque;

use crate::analysis::ProgramAnalysis;
use crate::interp::{BlockExit, Hooks, Interpreter, Limits, Outcome};
use crate::ir::{BlockId, FuncId, Program};

/// Values of a block's dump variables at one execution of that block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStateRecord {
    pub function: FuncId,
    pub block: BlockId,
    pub nonce: u64,
    /// In dump-set order.
    pub values: Vec<i128>,
}

struct Recorder<'a> {
    analysis: &'a ProgramAnalysis,
    out: Vec<BlockStateRecord>,
}

impl Hooks for Recorder<'_> {
    fn block_exit(&mut self, exit: &BlockExit<'_>) {
        let dump = self.analysis.func(exit.function).dump.block(exit.block);
        self.out.push(BlockStateRecord {
            function: exit.function,
            block: exit.block,
            nonce: 0,
            values: dump.iter().map(|v| exit.value(*v)).collect(),
        });
    }
}

/// Lazily executes corpus inputs and yields their block-state records in
/// execution order. Inputs that fault or run out of budget contribute
/// nothing.
pub struct TraceStream<'p, I> {
    interp: Interpreter<'p>,
    analysis: &'p ProgramAnalysis,
    inputs: I,
    position: usize,
    buf: VecDeque<BlockStateRecord>,
    next_nonce: u64,
    /// Corpus positions of the inputs that were dropped.
    pub skipped: Vec<usize>,
    pub executed: usize,
}

pub fn record_traces<'p, I, B>(
    program: &'p Program,
    analysis: &'p ProgramAnalysis,
    corpus: I,
    limits: Limits,
) -> TraceStream<'p, I::IntoIter>
where
    I: IntoIterator<Item = B>,
    B: AsRef<[u8]>,
{
    TraceStream {
        interp: Interpreter::new(program, limits),
        analysis,
        inputs: corpus.into_iter(),
        position: 0,
        buf: VecDeque::new(),
        next_nonce: 0,
        skipped: Vec::new(),
        executed: 0,
    }
}

impl<I, B> Iterator for TraceStream<'_, I>
where
    I: Iterator<Item = B>,
    B: AsRef<[u8]>,
{
    type Item = BlockStateRecord;

    fn next(&mut self) -> Option<BlockStateRecord> {
        while self.buf.is_empty() {
            let input = self.inputs.next()?;
            let pos = self.position;
            self.position += 1;
            self.executed += 1;
            let mut rec = Recorder { analysis: self.analysis, out: Vec::new() };
            let result = self.interp.run_entry(input.as_ref(), &mut rec);
            match result.outcome {
                Outcome::Ok { .. } => {
                    for mut r in rec.out {
                        r.nonce = self.next_nonce;
                        self.next_nonce += 1;
                        self.buf.push_back(r);
                    }
                }
                Outcome::Fault(f) => {
                    log::warn!("corpus input #{pos} faults ({}), skipped", f.kind);
                    self.skipped.push(pos);
                }
                Outcome::BudgetExhausted => {
                    log::warn!("corpus input #{pos} exhausts the step budget, skipped");
                    self.skipped.push(pos);
                }
            }
        }
        self.buf.pop_front()
    }
}
