use super::invariant::{Invariant, InvariantKind};
use crate::analysis::{Interval, ProgramAnalysis};

/// Whether static ranges alone guarantee the invariant on every execution.
pub fn implied_by_ranges(kind: &InvariantKind, ranges: &[Interval]) -> bool {
    let x = ranges[0];
    match kind {
        InvariantKind::ConstEqual(c) => x.lo == *c && x.hi == *c,
        InvariantKind::OneOf(set) => {
            x.hi.checked_sub(x.lo).is_some_and(|w| w < 3) && (x.lo..=x.hi).all(|v| set.contains(&v))
        }
        InvariantKind::LowerBound(c) => x.lo >= *c,
        InvariantKind::UpperBound(c) => x.hi <= *c,
        InvariantKind::NonZero => !x.contains(0),
        InvariantKind::EqVars => x.is_point() && x == ranges[1],
        InvariantKind::LeVars => x.hi <= ranges[1].lo,
        InvariantKind::Linear { .. } => {
            let y = ranges[1];
            x.is_point() && y.is_point() && kind.holds(&[x.lo, y.lo])
        }
    }
}

/// Splits `invs` into `(kept, pruned)`; pruned invariants can never be
/// violated and would only add checks.
pub fn prune_inviolable(
    invs: Vec<Invariant>,
    analysis: &ProgramAnalysis,
) -> (Vec<Invariant>, Vec<Invariant>) {
    invs.into_iter().partition(|inv| {
        let ranges = &analysis.func(inv.function).ranges;
        let rs: Vec<Interval> = inv.vars.iter().map(|v| ranges.get(*v)).collect();
        !implied_by_ranges(&inv.kind, &rs)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implication_examples() {
        let u32_full = Interval::new(0, (1 << 32) - 1);
        assert!(implied_by_ranges(&InvariantKind::LowerBound(0), &[u32_full]));
        let byte = Interval::new(0, 255);
        assert!(implied_by_ranges(&InvariantKind::UpperBound(300), &[byte]));
        assert!(!implied_by_ranges(&InvariantKind::UpperBound(200), &[byte]));
        assert!(!implied_by_ranges(&InvariantKind::NonZero, &[byte]));
        assert!(implied_by_ranges(&InvariantKind::NonZero, &[Interval::new(1, 9)]));
        assert!(implied_by_ranges(
            &InvariantKind::OneOf(vec![0, 1]),
            &[Interval::new(0, 1)]
        ));
        assert!(!implied_by_ranges(&InvariantKind::OneOf(vec![0, 1]), &[byte]));
        assert!(implied_by_ranges(
            &InvariantKind::LeVars,
            &[Interval::new(0, 3), Interval::new(3, 9)]
        ));
    }
}
