//! Deterministic interpreter for validated programs.
//!
//! Executions are pure functions of `(program, input, args)`: arithmetic wraps
//! modulo 2^width and the only faults are a `bug` terminator, division by
//! zero, out-of-bounds memory access and out-of-bounds input reads. Hooks see
//! block entries (for edge coverage), block exits together with the block
//! state, individual instructions, calls and returns.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ir::{
    BinaryOp, BlockId, FuncId, IcmpPred, InstKind, Operand, Program, ScalarType, TermKind,
    UnaryOp, ValueId,
};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
pub const DEFAULT_MEMORY_SIZE: usize = 64 * 1024;
/// Deeper call stacks end the run as resource exhaustion, like the step budget.
pub const MAX_CALL_DEPTH: usize = 4096;
/// Functions whose name starts with this prefix are runtime helpers and are
/// stripped from call stacks before hashing.
pub const RUNTIME_PREFIX: &str = "rt_";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub steps: u64,
    pub memory: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { steps: DEFAULT_STEP_BUDGET, memory: DEFAULT_MEMORY_SIZE }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultKind {
    BugInstruction,
    DivByZero,
    OobMemory,
    OobInput,
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultKind::BugInstruction => "bug-instruction",
            FaultKind::DivByZero => "div-by-zero",
            FaultKind::OobMemory => "oob-memory",
            FaultKind::OobInput => "oob-input",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackFrame {
    pub function: String,
    pub block: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub kind: FaultKind,
    pub function: String,
    pub block: u32,
    pub line: usize,
    /// Outermost frame first; never empty.
    pub stack: Vec<StackFrame>,
}

impl Fault {
    pub fn callstack_hash(&self) -> u64 {
        callstack_hash(&self.stack)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok { exit: i128 },
    Fault(Fault),
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionResult {
    pub outcome: Outcome,
    pub blocks_executed: u64,
    pub steps: u64,
}

impl ExecutionResult {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, Outcome::Ok { .. })
    }

    pub fn fault(&self) -> Option<&Fault> {
        match &self.outcome {
            Outcome::Fault(f) => Some(f),
            _ => None,
        }
    }

    pub fn exit_value(&self) -> Option<i128> {
        match self.outcome {
            Outcome::Ok { exit } => Some(exit),
            _ => None,
        }
    }
}

/// 64-bit FNV-1a over the ordered function names of a call stack, with
/// runtime helper frames removed. Block ids do not participate.
pub fn callstack_hash(frames: &[StackFrame]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for frame in frames.iter().filter(|f| !f.function.starts_with(RUNTIME_PREFIX)) {
        for b in frame.function.bytes().chain(std::iter::once(0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// Values of the SSA variables used or defined in a block, captured at block
/// exit, in the block's state order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockState {
    pub function: FuncId,
    pub block: BlockId,
    pub values: Vec<(ValueId, i128)>,
}

/// View handed to [`Hooks::block_exit`]: the frame's bindings right after the
/// block's last non-terminator instruction.
pub struct BlockExit<'a> {
    pub program: &'a Program,
    pub function: FuncId,
    pub block: BlockId,
    values: &'a [i128],
}

impl<'a> BlockExit<'a> {
    #[inline]
    pub fn value(&self, v: ValueId) -> i128 {
        self.values[v.index()]
    }

    pub fn state(&self) -> BlockState {
        let b = self.program.func(self.function).block(self.block);
        BlockState {
            function: self.function,
            block: self.block,
            values: b.state.iter().map(|v| (*v, self.value(*v))).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemWrite {
    pub addr: u64,
    pub ty: ScalarType,
    pub value: i128,
}

/// One program-state transition, reported by [`Hooks::instruction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstEvent {
    pub function: FuncId,
    pub block: BlockId,
    /// Instruction index; the terminator is `instructions.len()`.
    pub index: usize,
    pub binding: Option<(ValueId, i128)>,
    pub write: Option<MemWrite>,
}

/// Observation callbacks. All methods default to no-ops.
pub trait Hooks {
    /// Control reaches the head of `block` (phis not yet evaluated).
    fn block_enter(&mut self, _program: &Program, _function: FuncId, _block: BlockId) {}
    /// Every non-terminator instruction of the block has executed.
    fn block_exit(&mut self, _exit: &BlockExit<'_>) {}
    /// Per-instruction transition; only needed by reference tracers.
    fn instruction(&mut self, _event: &InstEvent) {}
    fn call(&mut self, _callee: FuncId) {}
    fn ret(&mut self) {}
    fn fault(&mut self, _fault: &Fault) {}
}

impl Hooks for () {}

impl<H: Hooks + ?Sized> Hooks for &mut H {
    fn block_enter(&mut self, p: &Program, f: FuncId, b: BlockId) {
        (**self).block_enter(p, f, b)
    }
    fn block_exit(&mut self, exit: &BlockExit<'_>) {
        (**self).block_exit(exit)
    }
    fn instruction(&mut self, event: &InstEvent) {
        (**self).instruction(event)
    }
    fn call(&mut self, callee: FuncId) {
        (**self).call(callee)
    }
    fn ret(&mut self) {
        (**self).ret()
    }
    fn fault(&mut self, fault: &Fault) {
        (**self).fault(fault)
    }
}

/// Runs the entry function on `input`. Entry parameters, if any, are zero.
pub fn execute<H: Hooks>(
    program: &Program,
    input: &[u8],
    hooks: &mut H,
    limits: &Limits,
) -> ExecutionResult {
    Interpreter::new(program, *limits).run(program.entry, &[], input, hooks)
}

pub fn execute_function<H: Hooks>(
    program: &Program,
    function: FuncId,
    args: &[i128],
    input: &[u8],
    hooks: &mut H,
    limits: &Limits,
) -> ExecutionResult {
    Interpreter::new(program, *limits).run(function, args, input, hooks)
}

struct Frame {
    function: FuncId,
    block: BlockId,
    pc: usize,
    values: Vec<i128>,
    /// Destination in the caller for the returned value.
    ret_dest: Option<ValueId>,
}

enum Flow {
    Next,
    Jump(BlockId),
    Call { callee: FuncId, args: Vec<i128> },
    Return(i128),
}

/// Reusable interpreter; keeps its memory buffer between runs and clears only
/// the bytes the previous run wrote.
pub struct Interpreter<'p> {
    program: &'p Program,
    limits: Limits,
    memory: Vec<u8>,
    dirty: Vec<(usize, usize)>,
    all_dirty: bool,
}

const DIRTY_CAP: usize = 1024;

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program, limits: Limits) -> Self {
        Interpreter {
            program,
            limits,
            memory: vec![0; limits.memory],
            dirty: Vec::new(),
            all_dirty: false,
        }
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn run_entry<H: Hooks>(&mut self, input: &[u8], hooks: &mut H) -> ExecutionResult {
        self.run(self.program.entry, &[], input, hooks)
    }

    fn reset_memory(&mut self) {
        if self.all_dirty {
            self.memory.fill(0);
        } else {
            for &(a, n) in &self.dirty {
                self.memory[a..a + n].fill(0);
            }
        }
        self.dirty.clear();
        self.all_dirty = false;
    }

    fn new_frame(&self, function: FuncId, args: &[i128], ret_dest: Option<ValueId>) -> Frame {
        let f = self.program.func(function);
        let mut values = vec![0i128; f.values.len()];
        for (i, p) in f.params.iter().enumerate() {
            values[p.index()] = args.get(i).copied().unwrap_or(0);
        }
        Frame { function, block: BlockId(0), pc: 0, values, ret_dest }
    }

    pub fn run<H: Hooks>(
        &mut self,
        function: FuncId,
        args: &[i128],
        input: &[u8],
        hooks: &mut H,
    ) -> ExecutionResult {
        self.reset_memory();
        let program = self.program;
        let mut steps = 0u64;
        let mut blocks_executed = 0u64;
        let mut stack = vec![self.new_frame(function, args, None)];
        hooks.block_enter(program, function, BlockId(0));
        blocks_executed += 1;

        let finish = |outcome, steps, blocks_executed| ExecutionResult {
            outcome,
            blocks_executed,
            steps,
        };

        loop {
            let depth = stack.len();
            let frame = stack.last_mut().unwrap();
            let func = program.func(frame.function);
            let block = func.block(frame.block);

            if frame.pc < block.instructions.len() {
                steps += 1;
                if steps > self.limits.steps {
                    return finish(Outcome::BudgetExhausted, steps - 1, blocks_executed);
                }
                let inst = &block.instructions[frame.pc];
                let flow = match eval_inst(
                    &inst.kind,
                    inst.result,
                    &mut frame.values,
                    &mut self.memory,
                    input,
                    frame.function,
                    frame.block,
                    frame.pc,
                    hooks,
                ) {
                    Ok(flow) => flow,
                    Err(kind) => {
                        let fault = make_fault(program, &stack, kind, inst.line);
                        hooks.fault(&fault);
                        return finish(Outcome::Fault(fault), steps, blocks_executed);
                    }
                };
                if let InstKind::Store { ty, addr, .. } = &inst.kind {
                    let a = operand(&frame.values, *addr) as usize;
                    if !self.all_dirty {
                        self.dirty.push((a, ty.bytes()));
                        if self.dirty.len() > DIRTY_CAP {
                            self.all_dirty = true;
                        }
                    }
                }
                match flow {
                    Flow::Next => frame.pc += 1,
                    Flow::Call { callee, args } => {
                        if depth >= MAX_CALL_DEPTH {
                            return finish(Outcome::BudgetExhausted, steps, blocks_executed);
                        }
                        let dest = inst.result;
                        let new = self.new_frame(callee, &args, dest);
                        stack.push(new);
                        hooks.call(callee);
                        hooks.block_enter(program, callee, BlockId(0));
                        blocks_executed += 1;
                    }
                    Flow::Jump(_) | Flow::Return(_) => unreachable!(),
                }
                continue;
            }

            // Block body done: report the block state, then the terminator.
            hooks.block_exit(&BlockExit {
                program,
                function: frame.function,
                block: frame.block,
                values: &frame.values,
            });
            steps += 1;
            if steps > self.limits.steps {
                return finish(Outcome::BudgetExhausted, steps - 1, blocks_executed);
            }
            let term = &block.terminator;
            let flow = match &term.kind {
                TermKind::Ret { value } => Flow::Return(operand(&frame.values, *value)),
                TermKind::Br { cond, then_, else_ } => {
                    if operand(&frame.values, *cond) != 0 {
                        Flow::Jump(*then_)
                    } else {
                        Flow::Jump(*else_)
                    }
                }
                TermKind::Jmp { target } => Flow::Jump(*target),
                TermKind::Bug => {
                    let fault = make_fault(program, &stack, FaultKind::BugInstruction, term.line);
                    hooks.fault(&fault);
                    return finish(Outcome::Fault(fault), steps, blocks_executed);
                }
            };
            hooks.instruction(&InstEvent {
                function: frame.function,
                block: frame.block,
                index: block.instructions.len(),
                binding: None,
                write: None,
            });
            match flow {
                Flow::Jump(target) => {
                    let from = frame.block;
                    hooks.block_enter(program, frame.function, target);
                    blocks_executed += 1;
                    frame.block = target;
                    frame.pc = 0;
                    let phi_count = enter_phis(program, frame, from);
                    let func = program.func(frame.function);
                    let tb = func.block(target);
                    for (i, inst) in tb.instructions[..phi_count].iter().enumerate() {
                        steps += 1;
                        if steps > self.limits.steps {
                            return finish(Outcome::BudgetExhausted, steps - 1, blocks_executed);
                        }
                        let r = inst.result.unwrap();
                        hooks.instruction(&InstEvent {
                            function: frame.function,
                            block: target,
                            index: i,
                            binding: Some((r, frame.values[r.index()])),
                            write: None,
                        });
                    }
                    frame.pc = phi_count;
                }
                Flow::Return(v) => {
                    let done = stack.pop().unwrap();
                    hooks.ret();
                    match stack.last_mut() {
                        None => return finish(Outcome::Ok { exit: v }, steps, blocks_executed),
                        Some(caller) => {
                            let dest = done.ret_dest.unwrap();
                            caller.values[dest.index()] = v;
                            hooks.instruction(&InstEvent {
                                function: caller.function,
                                block: caller.block,
                                index: caller.pc,
                                binding: Some((dest, v)),
                                write: None,
                            });
                            caller.pc += 1;
                        }
                    }
                }
                Flow::Next | Flow::Call { .. } => unreachable!(),
            }
        }
    }
}

/// Evaluates the leading phis of the frame's (new) block simultaneously.
fn enter_phis(program: &Program, frame: &mut Frame, from: BlockId) -> usize {
    let block = program.func(frame.function).block(frame.block);
    let mut pending: Vec<(ValueId, i128)> = Vec::new();
    for inst in &block.instructions {
        let InstKind::Phi { incoming, .. } = &inst.kind else { break };
        let (op, _) = incoming.iter().find(|(_, b)| *b == from).expect("validated phi");
        pending.push((inst.result.unwrap(), operand(&frame.values, *op)));
    }
    for (v, x) in &pending {
        frame.values[v.index()] = *x;
    }
    pending.len()
}

fn make_fault(program: &Program, stack: &[Frame], kind: FaultKind, line: usize) -> Fault {
    let top = stack.last().unwrap();
    Fault {
        kind,
        function: program.func(top.function).name.clone(),
        block: top.block.0,
        line,
        stack: stack
            .iter()
            .map(|f| StackFrame { function: program.func(f.function).name.clone(), block: f.block.0 })
            .collect(),
    }
}

#[inline]
fn operand(values: &[i128], op: Operand) -> i128 {
    match op {
        Operand::Value(v) => values[v.index()],
        Operand::Const(c) => c,
    }
}

/// Computes a binary operation on values already in `ty`'s range.
pub fn eval_binary(op: BinaryOp, ty: ScalarType, a: i128, b: i128) -> Option<i128> {
    let bits = ty.bits();
    let r = match op {
        BinaryOp::Add => a.wrapping_add(b),
        BinaryOp::Sub => a.wrapping_sub(b),
        BinaryOp::Mul => a.wrapping_mul(b),
        BinaryOp::Div => a.checked_div(b)?,
        BinaryOp::Rem => a.checked_rem(b)?,
        BinaryOp::And => a & b,
        BinaryOp::Or => a | b,
        BinaryOp::Xor => a ^ b,
        BinaryOp::Shl => ((a as u128) << (b.rem_euclid(bits as i128) as u32)) as i128,
        BinaryOp::Shr => a >> (b.rem_euclid(bits as i128) as u32),
    };
    Some(ty.wrap(r))
}

pub fn eval_icmp(pred: IcmpPred, a: i128, b: i128) -> i128 {
    let r = match pred {
        IcmpPred::Lt => a < b,
        IcmpPred::Le => a <= b,
        IcmpPred::Eq => a == b,
        IcmpPred::Ne => a != b,
    };
    r as i128
}

fn load(memory: &[u8], addr: i128, ty: ScalarType) -> Result<i128, FaultKind> {
    let n = ty.bytes();
    let a = usize::try_from(addr).map_err(|_| FaultKind::OobMemory)?;
    let bytes = memory.get(a..a.checked_add(n).ok_or(FaultKind::OobMemory)?).ok_or(FaultKind::OobMemory)?;
    let mut buf = [0u8; 8];
    buf[..n].copy_from_slice(bytes);
    Ok(ty.from_bits(u64::from_le_bytes(buf)))
}

fn store(memory: &mut [u8], addr: i128, ty: ScalarType, value: i128) -> Result<(), FaultKind> {
    let n = ty.bytes();
    let a = usize::try_from(addr).map_err(|_| FaultKind::OobMemory)?;
    let end = a.checked_add(n).ok_or(FaultKind::OobMemory)?;
    let dst = memory.get_mut(a..end).ok_or(FaultKind::OobMemory)?;
    dst.copy_from_slice(&ty.to_bits(value).to_le_bytes()[..n]);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn eval_inst<H: Hooks>(
    kind: &InstKind,
    result: Option<ValueId>,
    values: &mut [i128],
    memory: &mut [u8],
    input: &[u8],
    function: FuncId,
    block: BlockId,
    index: usize,
    hooks: &mut H,
) -> Result<Flow, FaultKind> {
    let mut write = None;
    let v = match kind {
        InstKind::Const { value, .. } => *value,
        InstKind::Binary { op, ty, lhs, rhs } => {
            eval_binary(*op, *ty, operand(values, *lhs), operand(values, *rhs))
                .ok_or(FaultKind::DivByZero)?
        }
        InstKind::Unary { op, ty, arg } => {
            let a = operand(values, *arg);
            match op {
                UnaryOp::Neg => ty.wrap(a.wrapping_neg()),
                UnaryOp::Not => ty.wrap(!a),
            }
        }
        InstKind::Cast { to, arg } => to.wrap(operand(values, *arg)),
        InstKind::Icmp { pred, lhs, rhs, .. } => {
            eval_icmp(*pred, operand(values, *lhs), operand(values, *rhs))
        }
        // Phis are evaluated on block entry.
        InstKind::Phi { .. } => return Ok(Flow::Next),
        InstKind::Load { ty, addr } => load(memory, operand(values, *addr), *ty)?,
        InstKind::Store { ty, addr, value } => {
            let a = operand(values, *addr);
            let x = operand(values, *value);
            store(memory, a, *ty, x)?;
            write = Some(MemWrite { addr: a as u64, ty: *ty, value: x });
            0
        }
        InstKind::Gep { base, indices } => {
            let mut a = operand(values, *base);
            for g in indices {
                a = a.wrapping_add(operand(values, g.index).wrapping_mul(g.stride as i128));
            }
            ScalarType::Ptr.wrap(a)
        }
        InstKind::Call { callee, args, .. } => {
            let args = args.iter().map(|a| operand(values, *a)).collect();
            return Ok(Flow::Call { callee: *callee, args });
        }
        InstKind::InputRead { ty, index } => {
            let i = operand(values, *index);
            let byte = usize::try_from(i)
                .ok()
                .and_then(|i| input.get(i))
                .ok_or(FaultKind::OobInput)?;
            ty.wrap(*byte as i128)
        }
        InstKind::InputLen { ty } => ty.wrap(input.len() as i128),
    };
    let binding = result.map(|r| {
        values[r.index()] = v;
        (r, v)
    });
    hooks.instruction(&InstEvent { function, block, index, binding, write });
    Ok(Flow::Next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    const MAX: &str = "\
program entry=max seed=7
fn @max(%x: i32, %y: i32) -> i32 {
entry:
  %c = icmp.lt i32 %y, %x
  br %c, if.then, if.else
if.then:
  %m1 = add i32 %x, 0
  jmp if.end
if.else:
  %m2 = add i32 %y, 0
  jmp if.end
if.end:
  %m3 = phi i32 [%m1, if.then], [%m2, if.else]
  ret i32 %m3
}
";

    #[derive(Default)]
    struct BlockLog(Vec<String>);

    impl Hooks for BlockLog {
        fn block_enter(&mut self, p: &Program, f: FuncId, b: BlockId) {
            self.0.push(p.func(f).block(b).label.clone());
        }
    }

    #[test]
    fn max_takes_else_branch() {
        let p = parse_program(MAX).unwrap();
        let mut log = BlockLog::default();
        let r = execute_function(&p, p.entry, &[3, 5], b"", &mut log, &Limits::default());
        assert_eq!(r.exit_value(), Some(5));
        assert_eq!(log.0, ["entry", "if.else", "if.end"]);
        assert_eq!(r.blocks_executed, 3);
    }

    const ROADBLOCK: &str = "\
program entry=main seed=1
fn @main() -> u8 {
entry:
  %n = input_len u64
  %empty = icmp.eq u64 %n, 0
  br %empty, out, check
check:
  %x = input_read u8 0
  %hit = icmp.eq u8 %x, 0xbd
  br %hit, boom, out
boom:
  bug
out:
  ret u8 0
}
";

    #[test]
    fn bug_instruction_faults_on_magic_byte() {
        let p = parse_program(ROADBLOCK).unwrap();
        let r = execute(&p, b"\xbd", &mut (), &Limits::default());
        let fault = r.fault().expect("fault");
        assert_eq!(fault.kind, FaultKind::BugInstruction);
        assert_eq!(fault.stack.len(), 1);
        assert!(execute(&p, b"\xbc", &mut (), &Limits::default()).is_ok());
        assert!(execute(&p, b"", &mut (), &Limits::default()).is_ok());
    }

    #[test]
    fn division_by_input_byte() {
        let src = "program entry=main seed=1\nfn @main() -> u32 {\nentry:\n  %b = input_read u32 0\n  %q = div u32 100, %b\n  ret u32 %q\n}\n";
        let p = parse_program(src).unwrap();
        let r = execute(&p, b"\x00", &mut (), &Limits::default());
        let f = r.fault().unwrap();
        assert_eq!(f.kind, FaultKind::DivByZero);
        assert_eq!(f.stack, [StackFrame { function: "main".into(), block: 0 }]);
        assert_eq!(execute(&p, b"\x04", &mut (), &Limits::default()).exit_value(), Some(25));
        assert_eq!(
            execute(&p, b"", &mut (), &Limits::default()).fault().unwrap().kind,
            FaultKind::OobInput
        );
    }

    #[test]
    fn memory_faults_and_little_endian_roundtrip() {
        let src = "program entry=main seed=1\nfn @main(%a: ptr) -> u8 {\nentry:\n  store u32 %a, 0x01020304\n  %p = gep %a, 1:1\n  %b = load u8 %p\n  ret u8 %b\n}\n";
        let p = parse_program(src).unwrap();
        let lim = Limits::default();
        assert_eq!(execute_function(&p, p.entry, &[16], b"", &mut (), &lim).exit_value(), Some(3));
        let r = execute_function(&p, p.entry, &[65534], b"", &mut (), &lim);
        assert_eq!(r.fault().unwrap().kind, FaultKind::OobMemory);
    }

    #[test]
    fn memory_is_cleared_between_runs() {
        let src = "program entry=main seed=1\nfn @main() -> u8 {\nentry:\n  %a = const ptr 100\n  %old = load u8 %a\n  %n = input_len u8\n  store u8 %a, %n\n  ret u8 %old\n}\n";
        let p = parse_program(src).unwrap();
        let mut it = Interpreter::new(&p, Limits::default());
        assert_eq!(it.run_entry(b"abc", &mut ()).exit_value(), Some(0));
        assert_eq!(it.run_entry(b"abc", &mut ()).exit_value(), Some(0));
    }

    #[test]
    fn budget_exhaustion_on_infinite_loop() {
        let src = "program entry=main seed=1\nfn @main() -> u8 {\nentry:\n  jmp spin\nspin:\n  jmp spin\n}\n";
        let p = parse_program(src).unwrap();
        let r = execute(&p, b"", &mut (), &Limits { steps: 1000, ..Limits::default() });
        assert_eq!(r.outcome, Outcome::BudgetExhausted);
        assert_eq!(r.steps, 1000);
    }

    #[test]
    fn wrapping_arithmetic() {
        assert_eq!(eval_binary(BinaryOp::Add, ScalarType::U8, 250, 10), Some(4));
        assert_eq!(eval_binary(BinaryOp::Sub, ScalarType::U8, 0, 1), Some(255));
        assert_eq!(eval_binary(BinaryOp::Div, ScalarType::I8, -128, -1), Some(-128));
        assert_eq!(eval_binary(BinaryOp::Rem, ScalarType::I8, -128, -1), Some(0));
        assert_eq!(eval_binary(BinaryOp::Shl, ScalarType::U64, u64::MAX as i128, 63), Some(1 << 63));
        assert_eq!(eval_binary(BinaryOp::Shr, ScalarType::I8, -128, 1), Some(-64));
        assert_eq!(eval_binary(BinaryOp::Shr, ScalarType::U8, 128, 9), Some(64));
        assert_eq!(eval_binary(BinaryOp::Div, ScalarType::U8, 1, 0), None);
    }

    #[test]
    fn callstack_hash_strips_runtime_frames() {
        let frames = |names: &[&str]| -> Vec<StackFrame> {
            names.iter().map(|n| StackFrame { function: n.to_string(), block: 0 }).collect()
        };
        let a = callstack_hash(&frames(&["main", "parse", "read"]));
        assert_eq!(a, callstack_hash(&frames(&["main", "parse", "read"])));
        assert_ne!(
            callstack_hash(&frames(&["main", "parse"])),
            callstack_hash(&frames(&["main", "emit"]))
        );
        assert_eq!(
            callstack_hash(&frames(&["main", "rt_memcpy", "parse"])),
            callstack_hash(&frames(&["main", "parse"]))
        );
        // Block ids are not part of the hash.
        let mut moved = frames(&["main", "parse"]);
        moved[1].block = 9;
        assert_eq!(callstack_hash(&moved), callstack_hash(&frames(&["main", "parse"])));
        // Name boundaries matter.
        assert_ne!(callstack_hash(&frames(&["ab", "c"])), callstack_hash(&frames(&["a", "bc"])));
    }

    #[test]
    fn calls_and_fault_stack() {
        let src = "\
program entry=main seed=2
fn @main() -> u8 {
entry:
  %r = call u8 @parse(1)
  ret u8 %r
}
fn @parse(%k: u8) -> u8 {
entry:
  %r = call u8 @rt_memcpy(%k)
  %q = div u8 10, %r
  ret u8 %q
}
fn @rt_memcpy(%k: u8) -> u8 {
entry:
  %z = sub u8 %k, 1
  ret u8 %z
}
";
        let p = parse_program(src).unwrap();
        let r = execute(&p, b"", &mut (), &Limits::default());
        let f = r.fault().unwrap();
        assert_eq!(f.kind, FaultKind::DivByZero);
        let names: Vec<&str> = f.stack.iter().map(|s| s.function.as_str()).collect();
        assert_eq!(names, ["main", "parse"]);
    }
}
