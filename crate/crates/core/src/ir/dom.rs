//! Immediate dominators via the iterative algorithm of Cooper, Harvey and
//! Kennedy over reverse post-order.

use thiserror::Error;

use super::{BlockId, Cfg};

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("block {0} is unreachable from the root")]
pub struct UnreachableBlock(pub BlockId);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominatorTree {
    idom: Vec<Option<BlockId>>,
    depth: Vec<u32>,
}

impl DominatorTree {
    /// Immediate dominator; `None` for the root.
    pub fn idom(&self, b: BlockId) -> Option<BlockId> {
        self.idom[b.index()]
    }

    /// Number of strict dominators of `b`.
    pub fn depth(&self, b: BlockId) -> u32 {
        self.depth[b.index()]
    }

    pub fn len(&self) -> usize {
        self.idom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idom.is_empty()
    }

    /// `a` dominates `b` iff `a` lies on the idom chain from `b` to the root.
    /// Every block dominates itself.
    pub fn dominates(&self, a: BlockId, b: BlockId) -> bool {
        let mut cur = b;
        while self.depth(cur) > self.depth(a) {
            cur = match self.idom(cur) {
                Some(p) => p,
                None => return false,
            };
        }
        cur == a
    }

    /// `b` followed by its strict dominators up to the root.
    pub fn chain(&self, b: BlockId) -> impl Iterator<Item = BlockId> + '_ {
        std::iter::successors(Some(b), move |x| self.idom(*x))
    }
}

pub fn dominator_tree(cfg: &Cfg) -> Result<DominatorTree, UnreachableBlock> {
    let n = cfg.len();
    let rpo = cfg.reverse_postorder();
    if rpo.len() != n {
        let reach = cfg.reachable();
        let b = reach.iter().position(|r| !r).unwrap();
        return Err(UnreachableBlock(BlockId(b as u32)));
    }
    let mut order = vec![0usize; n];
    for (i, b) in rpo.iter().enumerate() {
        order[b.index()] = i;
    }
    let mut idom: Vec<Option<usize>> = vec![None; n];
    if n == 0 {
        return Ok(DominatorTree { idom: vec![], depth: vec![] });
    }
    idom[0] = Some(0);
    let intersect = |idom: &[Option<usize>], mut a: usize, mut b: usize| {
        while a != b {
            while order[a] > order[b] {
                a = idom[a].unwrap();
            }
            while order[b] > order[a] {
                b = idom[b].unwrap();
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &b in rpo.iter().skip(1) {
            let mut new_idom = None;
            for p in cfg.preds(b) {
                if idom[p.index()].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p.index(),
                    Some(cur) => intersect(&idom, p.index(), cur),
                });
            }
            if new_idom != idom[b.index()] {
                idom[b.index()] = new_idom;
                changed = true;
            }
        }
    }
    let idom: Vec<Option<BlockId>> = idom
        .iter()
        .enumerate()
        .map(|(b, d)| if b == 0 { None } else { d.map(|d| BlockId(d as u32)) })
        .collect();
    let mut depth = vec![0u32; n];
    for &b in rpo.iter().skip(1) {
        depth[b.index()] = depth[idom[b.index()].unwrap().index()] + 1;
    }
    Ok(DominatorTree { idom, depth })
}
