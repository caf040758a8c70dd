use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::feedback::Novelty;

/// One interesting input and what it was worth when it was added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub input: Vec<u8>,
    /// Interpreter steps of one run.
    pub steps: u64,
    pub novelty: Novelty,
    /// Sorted `(index, bucket)` features of its run.
    pub features: Vec<u32>,
    /// Campaign execution count at which it was found (0 for seeds).
    pub found_at: u64,
    pub favored: bool,
}

/// Metadata written next to the corpus files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryMeta {
    pub ordinal: usize,
    pub file: String,
    pub len: usize,
    pub steps: u64,
    pub new_indices: u32,
    pub new_buckets: u32,
    pub found_at: u64,
}

pub const FAVORED_RECOMPUTE_EVERY: usize = 128;
pub const SKIP_NON_FAVORED: f64 = 0.9;

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
    cursor: usize,
    added_since_cover: usize,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &CorpusEntry {
        &self.entries[i]
    }

    /// New entries start favored: each holds a feature nobody else had yet,
    /// so any cover computed right now would contain it.
    pub fn add(&mut self, mut entry: CorpusEntry) {
        entry.favored = true;
        self.entries.push(entry);
        self.added_since_cover += 1;
        if self.added_since_cover >= FAVORED_RECOMPUTE_EVERY {
            self.recompute_favored();
        }
    }

    pub fn recompute_favored(&mut self) {
        let sets: Vec<&[u32]> = self.entries.iter().map(|e| e.features.as_slice()).collect();
        let cover = greedy_cover(&sets);
        for e in &mut self.entries {
            e.favored = false;
        }
        for i in cover {
            self.entries[i].favored = true;
        }
        self.added_since_cover = 0;
    }

    pub fn favored_count(&self) -> usize {
        self.entries.iter().filter(|e| e.favored).count()
    }

    /// Round-robin over the queue; a non-favored entry is passed over with
    /// probability 0.9.
    pub fn pick<R: Rng>(&mut self, rng: &mut R) -> usize {
        assert!(!self.entries.is_empty(), "pick from an empty corpus");
        let any_favored = self.entries.iter().any(|e| e.favored);
        loop {
            let i = self.cursor;
            self.cursor = (self.cursor + 1) % self.entries.len();
            if !any_favored || self.entries[i].favored || !rng.gen_bool(SKIP_NON_FAVORED) {
                return i;
            }
        }
    }

    pub fn mean_steps(&self) -> f64 {
        if self.entries.is_empty() {
            return 1.0;
        }
        self.entries.iter().map(|e| e.steps.max(1) as f64).sum::<f64>() / self.entries.len() as f64
    }

    /// Iterations to spend on entry `i`: `64 · speed · novelty`, clamped to
    /// `16..=1024`. Speed compares the entry's cost with the corpus mean
    /// (`0.25..=4`); novelty grows with the indices and buckets it discovered (`1..=4`).
    pub fn calibrate(&self, i: usize) -> u32 {
        let e = &self.entries[i];
        calibrate(e.steps, self.mean_steps(), e.novelty)
    }
}

pub fn calibrate(steps: u64, mean_steps: f64, novelty: Novelty) -> u32 {
    let speed = (mean_steps / steps.max(1) as f64).clamp(0.25, 4.0);
    let bonus = (1.0 + novelty.new_indices as f64 + novelty.new_buckets as f64 / 2.0).clamp(1.0, 4.0);
    (64.0 * speed * bonus).round().clamp(16.0, 1024.0) as u32
}

/// Greedy set cover: repeatedly takes the set adding the most uncovered
/// elements (lowest index on ties) until the union is covered. Returns the
/// chosen indices in selection order.
pub fn greedy_cover(sets: &[&[u32]]) -> Vec<usize> {
    let mut covered: std::collections::HashSet<u32> = Default::default();
    let total: std::collections::HashSet<u32> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    let mut chosen = Vec::new();
    let mut used = vec![false; sets.len()];
    while covered.len() < total.len() {
        let mut best = None;
        let mut best_gain = 0;
        for (i, s) in sets.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = s.iter().filter(|f| !covered.contains(f)).count();
            if gain > best_gain {
                best_gain = gain;
                best = Some(i);
            }
        }
        let i = best.expect("uncovered elements remain");
        used[i] = true;
        covered.extend(sets[i].iter().copied());
        chosen.push(i);
    }
    chosen
}
