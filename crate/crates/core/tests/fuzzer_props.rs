mod common;

use std::collections::BTreeSet;

use invscov_core::analysis::ProgramAnalysis;
use invscov_core::feedback::{CheckMode, CheckPlan, Novelty};
use invscov_core::fuzzer::{
    apply_op, calibrate, fuzz_loop, fuzz_loop_with, greedy_cover, mutate, Campaign, CampaignResult,
    Evaluation, FuzzConfig, MutationOp,
};
use invscov_core::interp::Limits;
use invscov_core::ir::{parse_program, Program};
use invscov_core::miner::deduplicate;
use invscov_core::pipeline::{mine, seed_campaign, MineConfig, TrialConfig};
use invscov_core::suite::{target, TARGETS};
use proptest::prelude::*;
use rand::Rng;

fn inputs(r: &CampaignResult) -> Vec<Vec<u8>> {
    r.corpus.entries().iter().map(|e| e.input.clone()).collect()
}

#[test]
fn greedy_cover_is_complete_and_within_the_log_bound() {
    let mut rng = common::rng(71);
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let sets: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let k = rng.gen_range(1..=6);
                (0..k).map(|_| rng.gen_range(0..12)).collect::<BTreeSet<u32>>().into_iter().collect()
            })
            .collect();
        let refs: Vec<&[u32]> = sets.iter().map(|s| s.as_slice()).collect();
        let chosen = greedy_cover(&refs);
        let universe: BTreeSet<u32> = sets.iter().flatten().copied().collect();
        let covered: BTreeSet<u32> = chosen.iter().flat_map(|i| sets[*i].iter().copied()).collect();
        assert_eq!(covered, universe);
        let opt = common::exhaustive_min_cover(&refs);
        let largest = sets.iter().map(|s| s.len()).max().unwrap();
        let harmonic: f64 = (1..=largest).map(|k| 1.0 / k as f64).sum();
        assert!(chosen.len() as f64 <= opt as f64 * harmonic + 1e-9, "{sets:?}: {chosen:?} vs {opt}");
    }
    let sets: [&[u32]; 3] = [&[1, 2], &[2, 3], &[1, 2, 3]];
    assert_eq!(greedy_cover(&sets), vec![2]);
}

fn novelty(i: u32, b: u32) -> Novelty {
    Novelty { new_indices: i, new_buckets: b }
}

#[test]
fn calibrate_limits() {
    assert_eq!(calibrate(1000, 10.0, novelty(0, 0)), 16);
    assert_eq!(calibrate(1, 1000.0, novelty(10, 10)), 1024);
}

proptest! {
    #[test]
    fn calibrate_is_monotone(
        s1 in 1u64..10_000, s2 in 1u64..10_000, mean in 1.0f64..10_000.0,
        i1 in 0u32..8, i2 in 0u32..8, b1 in 0u32..8, b2 in 0u32..8,
    ) {
        let (fast, slow) = (s1.min(s2), s1.max(s2));
        let n = novelty(i1, b1);
        prop_assert!(calibrate(fast, mean, n) >= calibrate(slow, mean, n));
        let lo = novelty(i1.min(i2), b1.min(b2));
        let hi = novelty(i1.max(i2), b1.max(b2));
        prop_assert!(calibrate(s1, mean, hi) >= calibrate(s1, mean, lo));
        let c = calibrate(s1, mean, n);
        prop_assert!((16..=1024).contains(&c));
    }

    #[test]
    fn mutate_always_changes_and_respects_the_length_limit(
        input in proptest::collection::vec(any::<u8>(), 0..64),
        partner in proptest::option::of(proptest::collection::vec(any::<u8>(), 0..64)),
        max_len in 1usize..96,
        seed in any::<u64>(),
    ) {
        let input: Vec<u8> = input.into_iter().take(max_len).collect();
        let mut rng = common::rng(seed);
        let out = mutate(&input, partner.as_deref(), max_len, &mut rng);
        prop_assert_ne!(&out, &input);
        prop_assert!(out.len() <= max_len);
    }
}

#[test]
fn single_operation_examples() {
    let mut rng = common::rng(72);
    let mut seen = BTreeSet::new();
    for _ in 0..500 {
        let mut buf = vec![0u8];
        assert!(apply_op(MutationOp::BitFlip, &mut buf, None, &mut rng));
        assert_eq!(buf.len(), 1);
        assert_eq!(buf[0].count_ones(), 1);
        seen.insert(buf[0]);
    }
    assert_eq!(seen.len(), 8);

    for _ in 0..200 {
        let mut buf = b"AAAA".to_vec();
        assert!(apply_op(MutationOp::Splice, &mut buf, Some(b"BBBB"), &mut rng));
        let a = buf.iter().take_while(|b| **b == b'A').count();
        assert!(a <= 4 && buf[a..].iter().all(|b| *b == b'B') && buf.len() - a <= 4);
    }

    let mut empty = Vec::new();
    assert!(!apply_op(MutationOp::ChunkDelete, &mut empty, None, &mut rng));
    assert!(!mutate(&[], None, 16, &mut rng).is_empty());
}

fn crashy(name: &str, seed: u64, budget: u64) -> CampaignResult {
    let p = target(name).unwrap().program();
    let plan = CheckPlan::empty(&p);
    let cfg = FuzzConfig { budget, rng_seed: seed, ..FuzzConfig::default() };
    fuzz_loop_with(&p, &[Vec::new()], &plan, cfg, true).unwrap()
}

#[test]
fn crash_set_holds_the_distinct_stack_hashes_of_all_faults() {
    let mut any = 0;
    for (k, t) in TARGETS.iter().enumerate() {
        let r = crashy(t.name, k as u64, 20_000);
        let logged: BTreeSet<u64> = r.fault_log.iter().map(|f| f.callstack_hash()).collect();
        let kept: BTreeSet<u64> = r.crashes.hashes().into_iter().collect();
        assert_eq!(logged, kept, "{}", t.name);
        assert_eq!(r.stats.total.faults as usize, r.fault_log.len());
        any += r.fault_log.len();
    }
    assert!(any > 0);
}

#[test]
fn known_crashes_and_timeouts_do_not_grow_anything() {
    let src = "program entry=main seed=9
fn @main() -> u8 {
entry:
  %b = input_read u8 0
  %c = icmp.eq u8 %b, 0
  br %c, spin, other
spin:
  jmp spin
other:
  %d = icmp.eq u8 %b, 1
  br %d, boom, fine
boom:
  bug
fine:
  ret u8 %b
}
";
    let p = parse_program(src).unwrap();
    let plan = CheckPlan::empty(&p);
    let cfg = FuzzConfig { limits: Limits { steps: 1000, ..Limits::default() }, ..FuzzConfig::default() };
    let mut c = Campaign::new(&p, &plan, cfg);
    assert!(matches!(c.evaluate(&[1]), Evaluation::NewCrash(_)));
    assert!(matches!(c.evaluate(&[1, 7]), Evaluation::KnownCrash(_)));
    assert_eq!(c.crashes.len(), 1);
    assert_eq!(c.evaluate(&[0]), Evaluation::Timeout);
    assert_eq!(c.corpus.len(), 0);
    assert_eq!(c.evaluate(&[5]), Evaluation::Added);
    assert_eq!(c.corpus.len(), 1);
    assert_eq!(c.evaluate(&[6]), Evaluation::Boring);
    assert_eq!(c.stats.total.timeouts, 1);
}

#[test]
fn stats_are_monotone() {
    for (k, t) in TARGETS.iter().enumerate() {
        let r = crashy(t.name, 40 + k as u64, 15_000);
        let s = &r.stats.series;
        assert_eq!(s.last().unwrap(), &r.stats.total);
        for w in s.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert!(a.execs < b.execs);
            assert!(a.corpus_size <= b.corpus_size);
            assert!(a.map_indices <= b.map_indices && a.map_buckets <= b.map_buckets);
            assert!(a.map_density <= b.map_density);
            assert!(a.faults <= b.faults && a.unique_bugs <= b.unique_bugs);
            assert!(a.timeouts <= b.timeouts && a.steps <= b.steps);
        }
    }
}

#[test]
fn campaigns_are_deterministic() {
    for (k, t) in TARGETS.iter().enumerate() {
        let (a, b) = (crashy(t.name, k as u64, 8000), crashy(t.name, k as u64, 8000));
        assert_eq!(inputs(&a), inputs(&b));
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.crashes.hashes(), b.crashes.hashes());
    }
}

fn seeds(p: &Program, seed: u64) -> Vec<Vec<u8>> {
    let cfg = TrialConfig { seed_execs: 4000, rng_seed: seed, ..TrialConfig::default() };
    inputs(&seed_campaign(p, &cfg).unwrap())
}

#[test]
fn inviolable_checks_leave_the_campaign_unchanged() {
    for (k, t) in TARGETS.iter().enumerate() {
        let p = t.program();
        let analysis = ProgramAnalysis::new(&p);
        let corpus = seeds(&p, k as u64);
        let mined = mine(&p, &analysis, &corpus, &MineConfig::default());
        let report = deduplicate(mined.pruned, &analysis);
        let checks = CheckPlan::new(&p, &report, CheckMode::Dedup);
        let edges = CheckPlan::empty(&p);
        let cfg = FuzzConfig { budget: 20_000, rng_seed: 1000 + k as u64, ..FuzzConfig::default() };
        let a = fuzz_loop(&p, &corpus, &checks, cfg).unwrap();
        let b = fuzz_loop(&p, &corpus, &edges, cfg).unwrap();
        assert_eq!(inputs(&a), inputs(&b), "{}", t.name);
        assert_eq!(a.stats, b.stats, "{}", t.name);
        assert_eq!(a.crashes.hashes(), b.crashes.hashes(), "{}", t.name);
    }
}
