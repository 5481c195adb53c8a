//! Independent oracles shared by the property tests and the acceptance
//! harness. Nothing in here calls the library's own non-rigorous code: the
//! reference trajectories use hand-written right-hand sides and a local RK4,
//! and interval results are judged with exact rationals.

#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use valid_ode::field::VectorField;
use valid_ode::interval::Interval;
use valid_ode::linalg::{IMat, IVec};
use valid_ode::sets::{C1DoubletonSet, DoubletonSet, FlowSet};
use valid_ode::solver::{Solver, SolverConfig};
use valid_ode::verify::{interval_newton, FnMap, NewtonStatus};

/// Outcome of one oracle suite.
#[derive(Debug, Default)]
pub struct Tally {
    pub trials: usize,
    pub violations: usize,
    pub first: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }
}

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn random_f64(rng: &mut ChaCha8Rng) -> f64 {
    let m: f64 = rng.gen_range(-1.0..1.0);
    let e: i32 = rng.gen_range(-30..30);
    m * 2f64.powi(e)
}

fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let a = random_f64(rng);
    let b = if rng.gen_bool(0.2) { a } else { a + random_f64(rng).abs() };
    Interval::new(a, b)
}

fn encloses(r: Interval, lo: &BigRational, hi: &BigRational) -> bool {
    q(r.lo()) <= *lo && q(r.hi()) >= *hi
}

fn min_max(v: Vec<BigRational>) -> (BigRational, BigRational) {
    let lo = v.iter().min().expect("nonempty").clone();
    let hi = v.iter().max().expect("nonempty").clone();
    (lo, hi)
}

/// Random `+ - × ÷ sqr sqrt` on random intervals, each result compared with
/// the exact rational range.
pub fn interval_fuzz(ops: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for _ in 0..ops {
        let a = random_interval(&mut rng);
        let b = random_interval(&mut rng);
        let (al, ah, bl, bh) = (q(a.lo()), q(a.hi()), q(b.lo()), q(b.hi()));
        match rng.gen_range(0..6) {
            0 => {
                let r = a + b;
                t.record(encloses(r, &(&al + &bl), &(&ah + &bh)), || format!("{a} + {b} = {r}"));
            }
            1 => {
                let r = a - b;
                t.record(encloses(r, &(&al - &bh), &(&ah - &bl)), || format!("{a} - {b} = {r}"));
            }
            2 => {
                let r = a * b;
                let (lo, hi) = min_max(vec![&al * &bl, &al * &bh, &ah * &bl, &ah * &bh]);
                t.record(encloses(r, &lo, &hi), || format!("{a} * {b} = {r}"));
            }
            3 => {
                let mut b = b;
                while b.contains_zero() {
                    b = random_interval(&mut rng);
                }
                let (bl, bh) = (q(b.lo()), q(b.hi()));
                let r = a.div(b).expect("divisor excludes zero");
                let (lo, hi) = min_max(vec![&al / &bl, &al / &bh, &ah / &bl, &ah / &bh]);
                t.record(encloses(r, &lo, &hi), || format!("{a} / {b} = {r}"));
            }
            4 => {
                let r = a.sqr();
                let (mut lo, hi) = min_max(vec![&al * &al, &ah * &ah]);
                if a.contains_zero() {
                    lo = BigRational::zero();
                }
                t.record(encloses(r, &lo, &hi), || format!("sqr {a} = {r}"));
            }
            _ => {
                let a = a.abs();
                let r = a.sqrt().expect("nonnegative");
                // r.lo² ≤ a.lo and r.hi² ≥ a.hi, exactly.
                let ok = (r.lo() <= 0.0 || q(r.lo()) * q(r.lo()) <= q(a.lo())) && q(r.hi()) * q(r.hi()) >= q(a.hi());
                t.record(ok, || format!("sqrt {a} = {r}"));
            }
        }
    }
    t
}

/// Test system: source for the library plus a hand-written right-hand side.
pub struct System {
    pub name: &'static str,
    pub source: &'static str,
    pub rhs: fn(f64, &[f64]) -> Vec<f64>,
    pub centre: &'static [f64],
    pub spread: f64,
    pub time: f64,
}

fn rossler(_: f64, u: &[f64]) -> Vec<f64> {
    vec![-(u[1] + u[2]), u[0] + 0.2 * u[1], 0.2 + u[2] * (u[0] - 5.7)]
}

fn lorenz(_: f64, u: &[f64]) -> Vec<f64> {
    vec![10.0 * (u[1] - u[0]), u[0] * (28.0 - u[2]) - u[1], u[0] * u[1] - 8.0 / 3.0 * u[2]]
}

fn pendulum(_: f64, u: &[f64]) -> Vec<f64> {
    vec![u[1], -u[0].sin()]
}

fn duffing(t: f64, u: &[f64]) -> Vec<f64> {
    vec![u[1], -0.1 * u[0] - 0.1 * u[0].powi(3) - 0.4464 * t.cos()]
}

pub fn systems() -> Vec<System> {
    vec![
        System {
            name: "rossler",
            source: "par:a,b;var:x,y,z;fun:-(y+z),x+b*y,b+z*(x-a);",
            rhs: rossler,
            centre: &[0.0, -6.0, 0.03],
            spread: 0.5,
            time: 2.0,
        },
        System {
            name: "lorenz",
            source: "var:x,y,z;fun:10*(y-x),x*(28-z)-y,x*y-8/3*z;",
            rhs: lorenz,
            centre: &[1.0, 1.0, 25.0],
            spread: 0.5,
            time: 0.5,
        },
        System { name: "pendulum", source: "var:x,dx;fun:dx,-sin(x);", rhs: pendulum, centre: &[1.0, 0.0], spread: 1.0, time: 3.0 },
        System {
            name: "duffing",
            source: "time:t;var:x,dx;fun:dx,-0.1*x-0.1*x^3-0.4464*cos(t);",
            rhs: duffing,
            centre: &[0.5, 0.0],
            spread: 0.5,
            time: 6.0,
        },
    ]
}

impl System {
    pub fn field(&self) -> VectorField {
        let f = VectorField::parse(self.source).expect("test field parses");
        if self.name == "rossler" {
            f.with_parameter("a", Interval::point(5.7))
                .and_then(|f| f.with_parameter("b", Interval::point(0.2)))
                .expect("rossler parameters")
        } else {
            f
        }
    }

    /// Classical RK4 with step `h`.
    pub fn flow(&self, x0: &[f64], t1: f64, h: f64) -> Vec<f64> {
        let steps = (t1 / h).ceil() as usize;
        let h = t1 / steps as f64;
        let mut x = x0.to_vec();
        let mut t = 0.0;
        let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        for _ in 0..steps {
            let k1 = (self.rhs)(t, &x);
            let k2 = (self.rhs)(t + h / 2.0, &axpy(&x, &k1, h / 2.0));
            let k3 = (self.rhs)(t + h / 2.0, &axpy(&x, &k2, h / 2.0));
            let k4 = (self.rhs)(t + h, &axpy(&x, &k3, h));
            for i in 0..x.len() {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        x
    }

    fn random_centre(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.centre.iter().map(|&c| c + rng.gen_range(-self.spread..self.spread)).collect()
    }
}

fn solver_config() -> SolverConfig {
    SolverConfig::default().with_order(16).with_tolerance(1e-12).with_h_max(0.1)
}

/// Boxes of radius `1e-3` are integrated rigorously; points from the inner
/// half of each box are integrated with RK4 and must land in the hull.
pub fn solver_containment(per_system: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let radius = 1e-3;
    for sys in systems() {
        let f = sys.field();
        let solver = Solver::new(&f, solver_config()).expect("config");
        for k in 0..per_system {
            let c = sys.random_centre(&mut rng);
            let bx: IVec = c.iter().map(|&ci| Interval::point(ci) + Interval::symmetric(radius)).collect();
            let mut set = DoubletonSet::from_box(&bx);
            let ok = solver.integrate_to(&mut set, Interval::ZERO, Interval::point(sys.time));
            let hull = match ok {
                Ok(()) => set.hull(),
                Err(e) => {
                    t.record(false, || format!("{} trajectory {k}: {e}", sys.name));
                    continue;
                }
            };
            for _ in 0..3 {
                let p: Vec<f64> = c.iter().map(|&ci| ci + rng.gen_range(-0.5 * radius..0.5 * radius)).collect();
                let end = sys.flow(&p, sys.time, 1e-3);
                t.record(hull.contains_point(&end), || format!("{} trajectory {k}: {end:?} outside {hull:?}", sys.name));
            }
        }
    }
    t
}

/// The C1 enclosure over a box of radius `1e-4` must contain the central
/// finite-difference derivative of the RK4 flow at the box centre.
pub fn c1_against_differences(per_system: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let (radius, delta) = (1e-4, 1e-5);
    for sys in systems() {
        let f = sys.field();
        let solver = Solver::new(&f, solver_config()).expect("config");
        let n = sys.centre.len();
        for k in 0..per_system {
            let c = sys.random_centre(&mut rng);
            let bx: IVec = c.iter().map(|&ci| Interval::point(ci) + Interval::symmetric(radius)).collect();
            let mut set = C1DoubletonSet::from_box(&bx);
            if let Err(e) = solver.integrate_to(&mut set, Interval::ZERO, Interval::point(sys.time)) {
                t.record(false, || format!("{} point {k}: {e}", sys.name));
                continue;
            }
            let d = set.derivative();
            let mut ok = true;
            for j in 0..n {
                let (mut plus, mut minus) = (c.clone(), c.clone());
                plus[j] += delta;
                minus[j] -= delta;
                let (fp, fm) = (sys.flow(&plus, sys.time, 1e-3), sys.flow(&minus, sys.time, 1e-3));
                for i in 0..n {
                    ok &= d[(i, j)].contains((fp[i] - fm[i]) / (2.0 * delta));
                }
            }
            t.record(ok, || format!("{} point {k}: finite differences outside {d:?}", sys.name));
        }
    }
    t
}

/// Monic polynomial with the given roots, coefficients (constant first)
/// enclosed in interval arithmetic.
fn poly_from_roots(roots: &[f64]) -> Vec<Interval> {
    let mut c = vec![Interval::ONE];
    for &r in roots {
        let mut next = vec![Interval::ZERO; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck.mul_scalar(r);
        }
        c = next;
    }
    c
}

fn horner(c: &[Interval], x: Interval) -> Interval {
    c.iter().rev().fold(Interval::ZERO, |acc, &ck| acc * x + ck)
}

fn derivative_coeffs(c: &[Interval]) -> Vec<Interval> {
    c.iter().enumerate().skip(1).map(|(k, &ck)| ck.mul_scalar(k as f64)).collect()
}

/// Interval Newton on random polynomials with known roots: a unique-zero
/// verdict must hold exactly one root, inside `N`; a no-zero verdict none.
/// Returns the tally and how many verdicts were decisive.
pub fn newton_soundness(polys: usize, boxes_per_poly: usize, seed: u64) -> (Tally, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let mut decisive = 0;
    for p in 0..polys {
        let degree = rng.gen_range(1..=4);
        let roots: Vec<f64> = (0..degree).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let c = poly_from_roots(&roots);
        let dc = derivative_coeffs(&c);
        let map = FnMap(
            |x: &IVec| Ok(IVec(vec![horner(&c, x[0])])),
            |x: &IVec| Ok(IMat::from_fn(1, 1, |_, _| horner(&dc, x[0]))),
        );
        for _ in 0..boxes_per_poly {
            let centre = if rng.gen_bool(0.5) {
                roots[rng.gen_range(0..degree)] + rng.gen_range(-0.05..0.05)
            } else {
                rng.gen_range(-6.0..6.0)
            };
            let r = 10f64.powf(rng.gen_range(-3.0..0.0));
            let bx = IVec(vec![Interval::new(centre - r, centre + r)]);
            let x0 = IVec::from_points(&[centre]);
            let Ok(v) = interval_newton(&map, &x0, &bx) else { continue };
            let inside: Vec<f64> = roots.iter().cloned().filter(|&z| bx[0].contains(z)).collect();
            match v.status {
                NewtonStatus::UniqueZero => {
                    decisive += 1;
                    let n = v.n.as_ref().expect("operator value")[0];
                    let distinct = inside.iter().all(|&z| z == inside[0]);
                    let ok = !inside.is_empty() && distinct && n.contains(inside[0]);
                    t.record(ok, || format!("poly {p} roots {roots:?}: unique zero in {bx:?} claimed, N = {n}"));
                }
                NewtonStatus::NoZero => {
                    decisive += 1;
                    t.record(inside.is_empty(), || format!("poly {p} roots {roots:?}: no zero in {bx:?} claimed"));
                }
                NewtonStatus::Inconclusive => {}
            }
        }
    }
    (t, decisive)
}

fn exact_posdef(m11: f64, off: f64, m22: f64) -> bool {
    let det = q(m11) * q(m22) - q(off) * q(off);
    q(m11).is_positive() && det.is_positive()
}

/// Random symmetric interval matrices accepted by the positive-definiteness
/// check; every sampled point selection must be positive definite
/// (decided exactly). Returns the tally over selections and how many
/// matrices were accepted.
pub fn posdef_agreement(selections: usize, seed: u64) -> (Tally, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let mut accepted = 0;
    let per_matrix = 20;
    while t.trials < selections {
        let d1 = rng.gen_range(0.0..4.0);
        let d2 = rng.gen_range(0.0..4.0);
        let o = rng.gen_range(-2.5..2.5);
        let w = rng.gen_range(0.0..1.0);
        let iv = |c: f64, rng: &mut ChaCha8Rng| Interval::new(c - w * rng.gen::<f64>(), c + w * rng.gen::<f64>());
        let m = IMat::from_rows(&[vec![iv(d1, &mut rng), iv(o, &mut rng)], vec![iv(o, &mut rng), iv(d2, &mut rng)]]).expect("2x2");
        if !valid_ode::linalg::posdef_sym_2x2(&m) {
            continue;
        }
        accepted += 1;
        let off = m[(0, 1)].hull(m[(1, 0)]);
        let pick = |x: Interval, rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.25) {
                if rng.gen_bool(0.5) {
                    x.lo()
                } else {
                    x.hi()
                }
            } else {
                rng.gen_range(x.lo()..=x.hi())
            }
        };
        for _ in 0..per_matrix {
            let (a, b, c) = (pick(m[(0, 0)], &mut rng), pick(off, &mut rng), pick(m[(1, 1)], &mut rng));
            t.record(exact_posdef(a, b, c), || format!("selection ({a}, {b}, {c}) of accepted {m:?} is not positive definite"));
        }
    }
    (t, accepted)
}
