mod common;

use invscov_core::analysis::{compute_comparability, merge_comparability, ComparabilityMap};
use invscov_core::ir::{parse_program, ValueId};
use invscov_core::testgen::{random_program, GenConfig};
use rand::Rng;

#[test]
fn straight_line_functions_match_transitive_closure() {
    let mut rng = common::rng(21);
    for case in 0..200 {
        let n = rng.gen_range(1..40);
        let text = common::random_dataflow_function(&mut rng, n);
        let p = parse_program(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        let f = &p.functions[0];
        assert!(f.instructions().count() <= 40);
        let oracle = common::comparability_oracle(f);
        if let Err(e) = common::same_partition(&compute_comparability(f), &oracle) {
            panic!("case {case}: {e}\n{text}");
        }
    }
}

#[test]
fn structured_functions_match_transitive_closure() {
    let mut rng = common::rng(22);
    let cfg = GenConfig { max_insts: 40, ..GenConfig::default() };
    let mut functions = 0;
    for _ in 0..80 {
        let p = random_program(&mut rng, &cfg);
        for f in &p.functions {
            let oracle = common::comparability_oracle(f);
            common::same_partition(&compute_comparability(f), &oracle)
                .unwrap_or_else(|e| panic!("{}: {e}", f.name));
            functions += 1;
        }
    }
    assert!(functions >= 100);
}

#[test]
fn merge_examples() {
    let (v1, v2, w) = (ValueId(0), ValueId(1), ValueId(2));

    let mut m = ComparabilityMap::new(3);
    m.assign_fresh(v1);
    merge_comparability(&mut m, v1, v2);
    assert_eq!(m.class(v2), m.class(v1));

    let mut m = ComparabilityMap::new(3);
    let before = m.counter();
    merge_comparability(&mut m, v1, v2);
    assert!(m.class(v1).is_some());
    assert_eq!(m.class(v1), m.class(v2));
    assert_eq!(m.counter(), before + 1);

    let mut m = ComparabilityMap::new(3);
    m.assign_fresh(v1);
    m.assign_fresh(v2);
    merge_comparability(&mut m, v2, w);
    let c1 = m.class(v1);
    merge_comparability(&mut m, v1, v2);
    assert_eq!(m.class(v2), c1);
    assert_eq!(m.class(w), c1);
}
