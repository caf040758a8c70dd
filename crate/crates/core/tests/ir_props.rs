mod common;

use invscov_core::analysis::ProgramAnalysis;
use invscov_core::ir::{dominator_tree, parse_program, BlockId, Cfg};
use invscov_core::suite::TARGETS;
use invscov_core::testgen::{random_program_text, GenConfig};
use rand::Rng;

fn check_against_oracle(succs: &[Vec<usize>]) {
    let cfg = Cfg::from_successors(
        succs.iter().map(|ss| ss.iter().map(|s| BlockId(*s as u32)).collect()).collect(),
    );
    let dom = dominator_tree(&cfg).expect("all blocks reachable");
    let oracle = common::brute_force_dominators(succs);
    for (b, expected) in oracle.iter().enumerate() {
        let expected = expected.as_ref().expect("reachable");
        let got: std::collections::BTreeSet<usize> =
            dom.chain(BlockId(b as u32)).map(|d| d.index()).collect();
        assert_eq!(&got, expected, "dominators of block {b} in {succs:?}");
        for a in 0..succs.len() {
            assert_eq!(
                dom.dominates(BlockId(a as u32), BlockId(b as u32)),
                expected.contains(&a),
                "dominates({a}, {b}) in {succs:?}"
            );
        }
    }
}

#[test]
fn dominators_match_all_paths_oracle() {
    let mut rng = common::rng(11);
    for _ in 0..3000 {
        let n = rng.gen_range(1..=12);
        let succs = common::random_cfg(&mut rng, n);
        check_against_oracle(&succs);
    }
}

#[test]
fn dominators_on_classic_shapes() {
    // diamond, loop with two exits, irreducible pair
    check_against_oracle(&[vec![1, 2], vec![3], vec![3], vec![]]);
    check_against_oracle(&[vec![1], vec![2, 4], vec![1, 3], vec![4], vec![]]);
    check_against_oracle(&[vec![1, 2], vec![2], vec![1]]);
}

#[test]
fn unreachable_block_is_reported() {
    let cfg = Cfg::from_successors(vec![vec![], vec![BlockId(0)]]);
    assert_eq!(dominator_tree(&cfg).unwrap_err().0, BlockId(1));
}

#[test]
fn block_locations_and_dump_sets_survive_reload() {
    let mut rng = common::rng(12);
    let mut texts: Vec<String> = TARGETS.iter().map(|t| t.source.to_string()).collect();
    texts.extend((0..50).map(|_| random_program_text(&mut rng, &GenConfig::default())));
    for text in &texts {
        let a = parse_program(text).unwrap();
        let b = parse_program(text).unwrap();
        let (da, db) = (ProgramAnalysis::new(&a), ProgramAnalysis::new(&b));
        for (fa, fb) in a.functions.iter().zip(&b.functions) {
            let la: Vec<u16> = fa.blocks.iter().map(|b| b.loc).collect();
            let lb: Vec<u16> = fb.blocks.iter().map(|b| b.loc).collect();
            assert_eq!(la, lb);
        }
        for (x, y) in da.functions.iter().zip(&db.functions) {
            assert_eq!(x.dump, y.dump);
        }
    }
}
