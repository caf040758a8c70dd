//! Invariant-coverage fuzzing over a small SSA IR.
pub mod analysis;
pub mod feedback;
pub mod fuzzer;
pub mod interp;
pub mod ir;
pub mod miner;
pub mod pipeline;
pub mod suite;
pub mod testgen;
