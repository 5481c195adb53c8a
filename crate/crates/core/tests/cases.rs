use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use valid_ode::cases::{emit_enclosures, michelson_field, rossler_field, rossler_w, run_case, CaseConfig, CaseKind};
use valid_ode::interval::Interval;
use valid_ode::linalg::IVec;
use valid_ode::poincare::{Direction, PoincareMap, Section};
use valid_ode::sets::FlowSet;
use valid_ode::solver::{Solver, SolverConfig};
use valid_ode::verify::Certificate;

fn rossler(_: f64, u: &[f64]) -> [f64; 3] {
    [-(u[1] + u[2]), u[0] + 0.2 * u[1], 0.2 + u[2] * (u[0] - 5.7)]
}

fn rk4(x: &[f64; 3], h: f64) -> [f64; 3] {
    let add = |a: &[f64; 3], k: &[f64; 3], s: f64| [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2]];
    let k1 = rossler(0.0, x);
    let k2 = rossler(0.0, &add(x, &k1, h / 2.0));
    let k3 = rossler(0.0, &add(x, &k2, h / 2.0));
    let k4 = rossler(0.0, &add(x, &k3, h));
    std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// `n`-th upward crossing of `x = 0`, located by bisecting the last step.
fn reference_return(y: f64, z: f64, n: usize) -> [f64; 2] {
    let h = 1e-3;
    let mut x = [0.0, y, z];
    let mut seen = 0;
    let mut t = 0.0;
    loop {
        let next = rk4(&x, h);
        t += h;
        if t > 0.1 && x[0] < 0.0 && next[0] >= 0.0 {
            seen += 1;
            if seen == n {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    if rk4(&x, m)[0] < 0.0 {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let p = rk4(&x, 0.5 * (lo + hi));
                return [p[1], p[2]];
            }
        }
        x = next;
    }
}

fn rossler_section() -> Section {
    Section::coordinate(3, 0, Interval::ZERO, Direction::Positive)
}

fn config() -> SolverConfig {
    SolverConfig::default().with_order(16).with_tolerance(1e-11)
}

#[test]
fn return_map_encloses_reference_crossings() {
    let f = rossler_field();
    let solver = Solver::new(&f, config()).unwrap();
    let pm = PoincareMap::new(&solver, rossler_section());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let y0 = rng.gen_range(-10.0..-3.0);
        let z0 = rng.gen_range(0.028..0.034);
        let chart = IVec(vec![Interval::new(y0, y0 + 0.01), Interval::new(z0, z0 + 1e-4)]);
        let r = pm.poincare_map(&pm.section().embed_box(&chart).unwrap(), 1).unwrap();
        let image = r.image.hull();
        for _ in 0..4 {
            let (y, z) = (y0 + rng.gen_range(0.001..0.009), z0 + rng.gen_range(1e-5..9e-5));
            let p = reference_return(y, z, 1);
            assert!(image.contains_point(&p), "P({y}, {z}) = {p:?} outside {image:?}");
        }
    }
}

#[test]
fn second_return_is_no_looser_than_composed_hulls() {
    let f = rossler_field();
    let solver = Solver::new(&f, config()).unwrap();
    let pm = PoincareMap::new(&solver, rossler_section());
    let chart = IVec(vec![Interval::new(-8.0, -7.98), Interval::new(0.03, 0.0301)]);
    let start = pm.section().embed_box(&chart).unwrap();
    let direct = pm.poincare_map(&start, 2).unwrap().image.hull();
    let first = pm.poincare_map(&start, 1).unwrap().image.hull();
    let composed = pm.poincare_map(&pm.section().embed_box(&first).unwrap(), 1).unwrap().image.hull();
    let widened: IVec = composed.iter().map(|c| c.inflate(8.0 * f64::EPSILON * c.mag())).collect();
    assert!(direct.subset(&widened), "P^2 {direct:?} not inside P(P) {composed:?}");
    let p = reference_return(-7.99, 0.03005, 2);
    assert!(direct.contains_point(&p), "{p:?} outside {direct:?}");
}

#[test]
fn michelson_map_is_reversible() {
    // R(y, z) = (y, -z) on x = 0 and R∘P = P⁻¹∘R, so P(R(P(u))) = R(u).
    let f = michelson_field(Interval::ONE);
    let solver = Solver::new(&f, SolverConfig::default().with_order(20).with_tolerance(1e-12)).unwrap();
    let pm = PoincareMap::new(&solver, Section::coordinate(3, 0, Interval::ZERO, Direction::Both));
    for y in [0.3, 0.5, 1.2] {
        let u = IVec::from_points(&[y, 0.0]);
        let pu = pm.poincare_map(&pm.section().embed_box(&u).unwrap(), 1).unwrap().image.hull();
        let rpu = IVec(vec![pu[0], -pu[1]]);
        let back = pm.poincare_map(&pm.section().embed_box(&rpu).unwrap(), 1).unwrap().image.hull();
        assert!(back.contains_point(&[y, 0.0]), "y = {y}: {back:?}");
        assert!(back.max_diam() < 1e-6, "y = {y}: {back:?}");
    }
}

#[test]
fn trap_rows_lie_inside_w() {
    let out = run_case(&CaseConfig::new(CaseKind::RosslerTrap)).unwrap();
    assert!(out.certificate.overall);
    let mut buf = Vec::new();
    emit_enclosures(CaseKind::RosslerTrap, &out.enclosures, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let w = rossler_w();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[0], "rossler-trap");
        let v: Vec<f64> = (2..6).map(|i| rec[i].parse().unwrap()).collect();
        assert!(v[0] > w[0].lo() && v[1] < w[0].hi() && v[2] > w[1].lo() && v[3] < w[1].hi(), "{rec:?}");
        rows += 1;
    }
    assert_eq!(rows, CaseKind::RosslerTrap.default_subdivisions());
}

#[test]
fn empty_run_gives_header_only() {
    let mut buf = Vec::new();
    emit_enclosures(CaseKind::PendulumRepr, &[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "case,piece_id,x_lo,x_hi,y_lo,y_hi\n");
}

#[test]
fn case_certificate_survives_round_trip() {
    let out = run_case(&CaseConfig::new(CaseKind::PendulumRepr)).unwrap();
    let cert = out.certificate;
    assert!(cert.overall && cert.recheck());
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert!(back.recheck());
    let parse = |s: String| serde_json::from_str::<serde_json::Value>(&s).unwrap();
    assert_eq!(parse(back.to_json()), parse(cert.to_json()));
    let mut forged = back.clone();
    forged.checks[0].threshold = 1e300;
    assert!(!forged.recheck());
}

#[test]
fn zero_subdivisions_are_rejected() {
    let cfg = CaseConfig { subdivisions: Some(0), ..CaseConfig::new(CaseKind::RosslerTrap) };
    assert!(run_case(&cfg).is_err());
}
