mod common;

use proptest::prelude::*;
use valid_ode::interval::Interval;
use valid_ode::linalg::{IMat, IVec};
use valid_ode::verify::{newton_iterate, FnMap};

fn assert_clean(name: &str, t: &common::Tally) {
    assert_eq!(t.violations, 0, "{name}: {} of {} failed, first: {:?}", t.violations, t.trials, t.first);
}

#[test]
fn interval_ops_enclose_exact_ranges() {
    let t = common::interval_fuzz(1_000_000, 1);
    assert_clean("interval fuzz", &t);
}

#[test]
fn solver_encloses_reference_trajectories() {
    let t = common::solver_containment(50, 2);
    assert_eq!(t.trials, 50 * 4 * 3);
    assert_clean("solver containment", &t);
}

#[test]
fn c1_encloses_finite_differences() {
    let t = common::c1_against_differences(20, 3);
    assert_eq!(t.trials, 20 * 4);
    assert_clean("C1 vs finite differences", &t);
}

#[test]
fn newton_verdicts_are_sound() {
    let (t, decisive) = common::newton_soundness(100, 20, 4);
    assert_clean("newton soundness", &t);
    assert!(decisive > 200, "only {decisive} decisive verdicts");
}

#[test]
fn posdef_acceptance_implies_every_selection() {
    let (t, accepted) = common::posdef_agreement(10_000, 5);
    assert_clean("posdef agreement", &t);
    assert!(accepted >= 100);
}

proptest! {
    #[test]
    fn newton_iterate_never_grows(a in -3.0f64..3.0, b in -3.0f64..3.0, lo in -4.0f64..0.0, w in 0.01f64..6.0) {
        // (x - a)(x - b) = x² - (a+b)x + ab
        let s = Interval::point(a) + Interval::point(b);
        let p = Interval::point(a) * Interval::point(b);
        let map = FnMap(
            move |x: &IVec| Ok(IVec(vec![x[0].sqr() - s * x[0] + p])),
            move |x: &IVec| Ok(IMat::from_fn(1, 1, |_, _| x[0].mul_scalar(2.0) - s)),
        );
        let bx = IVec(vec![Interval::new(lo, lo + w)]);
        let out = newton_iterate(&map, &bx, 8).unwrap();
        prop_assert!(out.subset(&bx));
        for r in [a, b] {
            if bx[0].contains(r) {
                prop_assert!(out[0].contains(r), "root {} lost: {:?}", r, out);
            }
        }
    }

    #[test]
    fn sums_and_products_of_members_stay_inside(x in -1e6f64..1e6, y in -1e6f64..1e6, dx in 0.0f64..10.0, dy in 0.0f64..10.0) {
        // Round-to-nearest is monotone, so the float result of members is
        // bracketed by the outward-rounded endpoints.
        let a = Interval::new(x, x + dx);
        let b = Interval::new(y, y + dy);
        for (u, v) in [(x, y), (x + dx, y + dy), (x + 0.5 * dx, y), (x, y + dy)] {
            prop_assert!((a + b).contains(u + v));
            prop_assert!((a - b).contains(u - v));
            prop_assert!((a * b).contains(u * v));
        }
    }
}
