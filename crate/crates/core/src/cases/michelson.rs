//! Symmetric periodic orbits of the Michelson system for a whole parameter
//! interval. The return map acts on the section `x = 0` (both directions);
//! a point `(0, y, 0)` whose image again has `z = 0` lies on a symmetric
//! orbit, so a sign change of `π_z P_c(0, ·, 0)` over a bracket proves one.
//!
//! The rigorous runs use the field with `c` appended to the state, so one
//! set covers the whole parameter interval.

use super::constants::*;
use super::{fmt_iv, CaseOutcome, EnclosureRow};
use crate::error::Result;
use crate::interval::Interval;
use crate::linalg::IVec;
use crate::nonrigorous::Rk4;
use crate::poincare::{Direction, PoincareMap, Section};
use crate::sets::FlowSet;
use crate::solver::{Solver, SolverConfig};
use crate::verify::{sign_change_existence, Certificate, Check, Relation};

pub(crate) fn section() -> Section {
    Section::coordinate(3, 0, Interval::ZERO, Direction::Both)
}

/// `x = 0` in `(x, y, z, c)`; chart coordinates are `(y, z, c)`.
pub(crate) fn extended_section() -> Section {
    Section::coordinate(4, 0, Interval::ZERO, Direction::Both)
}

/// Nonrigorous `π_z P_c(0, y, 0)`.
fn shoot(rk: &mut Rk4, y: f64) -> Option<f64> {
    rk.first_return(&section(), &[0.0, y, 0.0], 1, 1e-3, 50.0).map(|(_, p)| p[2])
}

fn bisect(rk: &mut Rk4, mut a: f64, mut b: f64) -> Option<f64> {
    let mut ga = shoot(rk, a)?;
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let gm = shoot(rk, m)?;
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// First `count` sign changes of the shooting function on `(0, y_max]`.
pub(crate) fn shooting_zeros(c: f64, count: usize, y_max: f64) -> Vec<f64> {
    let f = michelson_field(Interval::point(c));
    let mut rk = Rk4::new(&f);
    let mut zeros = Vec::new();
    let dy = 0.01;
    let mut prev: Option<(f64, f64)> = None;
    let mut y = dy;
    while y <= y_max && zeros.len() < count {
        let g = shoot(&mut rk, y);
        if let (Some((yp, gp)), Some(g)) = (prev, g) {
            if (gp < 0.0) != (g < 0.0) {
                if let Some(z) = bisect(&mut rk, yp, y) {
                    zeros.push(z);
                }
            }
        }
        prev = g.map(|g| (y, g));
        y += dy;
    }
    zeros
}

pub(super) fn symmetric(cfg: &SolverConfig) -> Result<CaseOutcome> {
    let c_range = michelson_c();
    let f = michelson_extended_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let pm = PoincareMap::new(&solver, extended_section());
    let mut cert = Certificate::new("michelson-symmetric").with_field_hash(f.fingerprint());
    let mut report = Vec::new();
    let mut rows = Vec::new();

    // Zeros at the centre and both ends of C bound the drift of each zero.
    let centre = shooting_zeros(1.0, 2, 3.0);
    let low = shooting_zeros(c_range.lo(), 2, 3.0);
    let high = shooting_zeros(c_range.hi(), 2, 3.0);
    cert.push(Check::new(
        "symmetric candidates found by shooting",
        Interval::point(centre.len().min(low.len()).min(high.len()) as f64),
        Relation::Gt,
        1.5,
    ));
    if !cert.overall {
        return Ok(CaseOutcome { certificate: cert, enclosures: rows, report });
    }

    let image = |y: Interval| -> Result<IVec> {
        let set = pm.section().embed_box(&IVec(vec![y, Interval::ZERO, c_range]))?;
        Ok(pm.poincare_map(&set, 1)?.image.hull())
    };
    for k in 0..2 {
        let spread = [centre[k], low[k], high[k]];
        let lo = spread.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spread.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let label = format!("Y{}", k + 1);
        // Widen until the rigorous endpoint signs separate.
        let mut margin = 0.5 * (hi - lo) + 1e-3;
        let mut attempt = None;
        for _ in 0..4 {
            let bracket = Interval::new(lo - margin, hi + margin);
            let sc = sign_change_existence(&label, |y| image(y).map(|h| h[1]), bracket);
            let done = sc.overall;
            attempt = Some((bracket, sc));
            if done {
                break;
            }
            margin *= 2.0;
        }
        let (bracket, sc) = attempt.expect("at least one attempt");
        cert.set_config(format!("bracket_{label}"), fmt_iv(bracket));
        for mut c in sc.checks {
            c.description = format!("{label}: pi_z P_c at {}", c.description);
            cert.push(c);
        }
        let whole = image(bracket).map_err(|e| e.in_piece(&label))?;
        cert.push(Check::new(format!("{label}: pi_y P_c(0, {label}, 0)"), whole[0], Relation::Lt, 0.0));
        rows.push(EnclosureRow::new(&label, &whole));
        report.push(format!(
            "{label} = {} (shooting zeros {:.6} / {:.6} / {:.6} at c = lo / 1 / hi), pi_y P in {}",
            fmt_iv(bracket),
            low[k],
            centre[k],
            high[k],
            fmt_iv(whole[0])
        ));
    }
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}
