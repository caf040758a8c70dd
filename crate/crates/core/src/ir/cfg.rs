use super::{BlockId, Function};

/// Successor and predecessor lists of a function's blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub succs: Vec<Vec<BlockId>>,
    pub preds: Vec<Vec<BlockId>>,
}

impl Cfg {
    /// Builds a CFG from raw successor lists; block 0 is the root.
    pub fn from_successors(succs: Vec<Vec<BlockId>>) -> Self {
        let mut preds = vec![Vec::new(); succs.len()];
        for (b, ss) in succs.iter().enumerate() {
            for s in ss {
                let p = BlockId(b as u32);
                if !preds[s.index()].contains(&p) {
                    preds[s.index()].push(p);
                }
            }
        }
        Cfg { succs, preds }
    }

    pub fn len(&self) -> usize {
        self.succs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succs.is_empty()
    }

    pub fn succs(&self, b: BlockId) -> &[BlockId] {
        &self.succs[b.index()]
    }

    pub fn preds(&self, b: BlockId) -> &[BlockId] {
        &self.preds[b.index()]
    }

    /// Blocks reachable from the root, in reverse post-order.
    pub fn reverse_postorder(&self) -> Vec<BlockId> {
        if self.succs.is_empty() {
            return Vec::new();
        }
        let mut visited = vec![false; self.len()];
        let mut post = Vec::with_capacity(self.len());
        // Iterative DFS: (block, next successor index).
        let mut stack = vec![(BlockId(0), 0usize)];
        visited[0] = true;
        while let Some((b, i)) = stack.last_mut() {
            let ss = &self.succs[b.index()];
            if *i < ss.len() {
                let s = ss[*i];
                *i += 1;
                if !visited[s.index()] {
                    visited[s.index()] = true;
                    stack.push((s, 0));
                }
            } else {
                post.push(*b);
                stack.pop();
            }
        }
        post.reverse();
        post
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        for b in self.reverse_postorder() {
            seen[b.index()] = true;
        }
        seen
    }
}

/// Every edge corresponds to a terminator target; a conditional branch
/// contributes exactly two successors.
pub fn build_cfg(f: &Function) -> Cfg {
    Cfg::from_successors(f.blocks.iter().map(|b| b.terminator.kind.successors()).collect())
}
