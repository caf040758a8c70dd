use serde::{Deserialize, Serialize};

use crate::ir::{build_cfg, Function, InstKind, Operand, ValueId};

pub type ClassId = u32;

/// Assignment of IR values to comparability classes. `None` is the universal
/// class ε: comparable with every other value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparabilityMap {
    assignment: Vec<Option<ClassId>>,
    next_id: ClassId,
}

impl ComparabilityMap {
    pub fn new(values: usize) -> Self {
        ComparabilityMap { assignment: vec![None; values], next_id: 1 }
    }

    pub fn class(&self, v: ValueId) -> Option<ClassId> {
        self.assignment[v.index()]
    }

    /// The id the next fresh class will get.
    pub fn counter(&self) -> ClassId {
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Values may be related by a binary invariant.
    pub fn comparable(&self, a: ValueId, b: ValueId) -> bool {
        match (self.class(a), self.class(b)) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        }
    }

    pub fn assign_fresh(&mut self, v: ValueId) {
        self.assignment[v.index()] = Some(self.next_id);
        self.next_id += 1;
    }

    /// Union of the classes of `v1` and `v2`.
    ///
    /// One side classified: the other adopts its class. Neither: both get a
    /// fresh id. Both: every member of `v2`'s class is relabeled to `v1`'s.
    pub fn merge(&mut self, v1: ValueId, v2: ValueId) {
        if v1 == v2 {
            return;
        }
        match (self.class(v1), self.class(v2)) {
            (Some(c1), None) => self.assignment[v2.index()] = Some(c1),
            (None, Some(c2)) => self.assignment[v1.index()] = Some(c2),
            (None, None) => {
                let id = self.next_id;
                self.assignment[v1.index()] = Some(id);
                self.assignment[v2.index()] = Some(id);
                self.next_id += 1;
            }
            (Some(c1), Some(c2)) => {
                if c1 != c2 {
                    for slot in &mut self.assignment {
                        if *slot == Some(c2) {
                            *slot = Some(c1);
                        }
                    }
                }
            }
        }
    }

    /// Non-ε classes as sorted member lists, ordered by smallest member.
    pub fn classes(&self) -> Vec<Vec<ValueId>> {
        let mut by_class: std::collections::BTreeMap<ClassId, Vec<ValueId>> = Default::default();
        for (i, c) in self.assignment.iter().enumerate() {
            if let Some(c) = c {
                by_class.entry(*c).or_default().push(ValueId(i as u32));
            }
        }
        let mut classes: Vec<Vec<ValueId>> = by_class.into_values().collect();
        classes.sort();
        classes
    }
}

/// Standalone form of [`ComparabilityMap::merge`].
pub fn merge_comparability(map: &mut ComparabilityMap, v1: ValueId, v2: ValueId) {
    map.merge(v1, v2);
}

/// Walks the function's instructions in reverse post-order of blocks (so a
/// load's fresh class is assigned before any use merges into it):
/// unary and cast merge result with operand, binary merges result with both
/// operands, gep merges result with the address and every index with the
/// first index, load gets a fresh class. Everything else stays ε.
pub fn compute_comparability(f: &Function) -> ComparabilityMap {
    let mut map = ComparabilityMap::new(f.values.len());
    let merge_op = |map: &mut ComparabilityMap, v: ValueId, op: Operand| {
        if let Operand::Value(o) = op {
            map.merge(v, o);
        }
    };
    for b in build_cfg(f).reverse_postorder() {
        for inst in &f.block(b).instructions {
            let Some(r) = inst.result else { continue };
            match &inst.kind {
                InstKind::Unary { arg, .. } | InstKind::Cast { arg, .. } => {
                    merge_op(&mut map, r, *arg)
                }
                InstKind::Binary { lhs, rhs, .. } => {
                    merge_op(&mut map, r, *lhs);
                    merge_op(&mut map, r, *rhs);
                }
                InstKind::Gep { base, indices } => {
                    merge_op(&mut map, r, *base);
                    if let Some(Operand::Value(first)) = indices.first().map(|i| i.index) {
                        for other in &indices[1..] {
                            merge_op(&mut map, first, other.index);
                        }
                    }
                }
                InstKind::Load { .. } => map.assign_fresh(r),
                _ => {}
            }
        }
    }
    map
}
