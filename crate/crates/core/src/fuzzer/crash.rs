use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::interp::{Fault, FaultKind, StackFrame};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashRecord {
    pub hash: u64,
    pub kind: FaultKind,
    pub function: String,
    pub block: u32,
    pub line: usize,
    pub stack: Vec<StackFrame>,
    pub found_at: u64,
    /// Faulting executions with this hash.
    pub hits: u64,
    #[serde(skip)]
    pub input: Vec<u8>,
}

/// Crashes deduplicated by stripped call-stack hash; the first input wins.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrashSet {
    by_hash: BTreeMap<u64, CrashRecord>,
}

impl CrashSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if the hash was new.
    pub fn insert(&mut self, fault: &Fault, input: &[u8], exec: u64) -> bool {
        let hash = fault.callstack_hash();
        if let Some(r) = self.by_hash.get_mut(&hash) {
            r.hits += 1;
            return false;
        }
        self.by_hash.insert(
            hash,
            CrashRecord {
                hash,
                kind: fault.kind,
                function: fault.function.clone(),
                block: fault.block,
                line: fault.line,
                stack: fault.stack.clone(),
                found_at: exec,
                hits: 1,
                input: input.to_vec(),
            },
        );
        true
    }

    /// Adds a record from another set; the existing one wins.
    pub fn absorb(&mut self, rec: &CrashRecord) -> bool {
        if self.by_hash.contains_key(&rec.hash) {
            return false;
        }
        self.by_hash.insert(rec.hash, rec.clone());
        true
    }

    pub fn len(&self) -> usize {
        self.by_hash.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_hash.is_empty()
    }

    pub fn contains(&self, hash: u64) -> bool {
        self.by_hash.contains_key(&hash)
    }

    pub fn get(&self, hash: u64) -> Option<&CrashRecord> {
        self.by_hash.get(&hash)
    }

    /// Ordered by hash.
    pub fn iter(&self) -> impl Iterator<Item = &CrashRecord> {
        self.by_hash.values()
    }

    pub fn hashes(&self) -> Vec<u64> {
        self.by_hash.keys().copied().collect()
    }
}
