mod common;

use invscov_core::analysis::{compute_ranges, Interval, ProgramAnalysis};
use invscov_core::interp::{Interpreter, Limits};
use invscov_core::ir::{parse_program, Program};
use invscov_core::suite::TARGETS;
use invscov_core::testgen::{random_input, random_program, GenConfig};
use proptest::prelude::*;

fn assert_sound(program: &Program, inputs: &[Vec<u8>], what: &str) -> u64 {
    let analysis = ProgramAnalysis::new(program);
    let mut watcher = common::RangeWatcher { analysis: &analysis, checked: 0, violations: Vec::new() };
    let mut interp = Interpreter::new(program, Limits::default());
    for input in inputs {
        interp.run_entry(input, &mut watcher);
        assert!(watcher.violations.is_empty(), "{what} on {input:?}: {:?}", watcher.violations);
    }
    watcher.checked
}

#[test]
fn suite_targets_stay_within_ranges() {
    let mut rng = common::rng(31);
    for t in TARGETS {
        let p = t.program();
        let inputs = common::random_inputs(&mut rng, 1500, 64, &common::known_inputs(t.name));
        let checked = assert_sound(&p, &inputs, t.name);
        assert!(checked > 1500, "{}: only {checked} bindings observed", t.name);
    }
}

#[test]
fn random_programs_stay_within_ranges() {
    let mut rng = common::rng(32);
    for _ in 0..60 {
        let p = random_program(&mut rng, &GenConfig::default());
        let inputs: Vec<Vec<u8>> = (0..200).map(|_| random_input(&mut rng, 16)).collect();
        assert_sound(&p, &inputs, "random program");
    }
}

#[test]
fn merge_of_two_definitions_is_their_hull() {
    let src = "program entry=f seed=1
fn @f(%c: u8, %a: u8, %b: u8) -> u8 {
entry:
  br %c, left, right
left:
  %x = and u8 %a, 5
  jmp join
right:
  %y0 = rem u8 %b, 11
  %y = add u8 %y0, 10
  jmp join
join:
  %m = phi u8 [%x, left], [%y, right]
  ret u8 %m
}
";
    let p = parse_program(src).unwrap();
    let f = &p.functions[0];
    let r = compute_ranges(f);
    let m = r.get(f.value_id("m").unwrap());
    // Every concrete value the phi can take, by enumeration of both arms.
    let mut seen = Vec::new();
    for c in 0..2u8 {
        for v in 0..=255u8 {
            let mut interp = Interpreter::new(&p, Limits::default());
            let mut w = Capture(f.value_id("m").unwrap(), None);
            interp.run(p.entry, &[c as i128, v as i128, v as i128], &[], &mut w);
            if let Some(x) = w.1 {
                seen.push(x);
            }
        }
    }
    let (lo, hi) = (*seen.iter().min().unwrap(), *seen.iter().max().unwrap());
    assert_eq!((lo, hi), (0, 20));
    let hull = r.get(f.value_id("x").unwrap()).hull(r.get(f.value_id("y").unwrap()));
    assert_eq!(m, hull);
    assert!(m.lo <= lo && hi <= m.hi, "{m:?} misses [{lo}, {hi}]");
    assert_eq!(Interval::new(0, 5).hull(Interval::new(10, 20)), Interval::new(0, 20));
}

struct Capture(invscov_core::ir::ValueId, Option<i128>);

impl invscov_core::interp::Hooks for Capture {
    fn instruction(&mut self, e: &invscov_core::interp::InstEvent) {
        if let Some((v, x)) = e.binding {
            if v == self.0 {
                self.1 = Some(x);
            }
        }
    }
}

#[test]
fn interval_examples() {
    assert_eq!(Interval::new(1, 2).add(Interval::new(3, 4)), Interval::new(4, 6));
    let src = "program entry=f seed=1\nfn @f(%v: u32) -> u32 {\nentry:\n  ret u32 %v\n}\n";
    let p = parse_program(src).unwrap();
    let f = &p.functions[0];
    assert_eq!(compute_ranges(f).get(f.value_id("v").unwrap()), Interval::new(0, (1 << 32) - 1));
}

fn interval() -> impl Strategy<Value = Interval> {
    (-1000i128..1000, 0i128..500).prop_map(|(lo, w)| Interval::new(lo, lo + w))
}

proptest! {
    #[test]
    fn interval_arithmetic_contains_concrete_results(
        a in interval(), b in interval(), s in 0.0f64..=1.0, t in 0.0f64..=1.0,
    ) {
        let x = a.lo + ((a.hi - a.lo) as f64 * s) as i128;
        let y = b.lo + ((b.hi - b.lo) as f64 * t) as i128;
        prop_assert!(a.add(b).contains(x + y));
        prop_assert!(a.sub(b).contains(x - y));
        prop_assert!(a.mul(b).contains(x * y));
        prop_assert!(a.neg().contains(-x));
        prop_assert!(a.hull(b).contains(x) && a.hull(b).contains(y));
    }
}
