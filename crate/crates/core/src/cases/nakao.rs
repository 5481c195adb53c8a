//! Periodic boundary value problem for the forced Duffing-type equation
//! `x'' = -0.1x - 0.1x³ - 0.4464 cos t`: zeros of
//! `F(x) = φ_ẋ(2π, 0, x, 0)` are solutions with `x'(0) = x'(2π) = 0`.

use super::constants::*;
use super::{fmt_iv, CaseOutcome, EnclosureRow};
use crate::error::Result;
use crate::field::VectorField;
use crate::interval::Interval;
use crate::linalg::{IMat, IVec};
use crate::sets::{C1DoubletonSet, DoubletonSet, FlowSet};
use crate::solver::{Solver, SolverConfig};
use crate::verify::{interval_newton_enlarging, Certificate, Check, FnMap, Relation};

fn two_pi() -> Interval {
    Interval::PI.mul_scalar(2.0)
}

fn velocity_at_end(solver: &Solver, x: Interval) -> Result<Interval> {
    let mut set = DoubletonSet::from_box(&IVec(vec![x, Interval::ZERO]));
    solver.integrate_to(&mut set, Interval::ZERO, two_pi())?;
    Ok(set.hull()[1])
}

fn velocity_derivative(solver: &Solver, x: Interval) -> Result<Interval> {
    let mut set = C1DoubletonSet::from_box(&IVec(vec![x, Interval::ZERO]));
    solver.integrate_to(&mut set, Interval::ZERO, two_pi())?;
    Ok(set.derivative()[(1, 0)])
}

pub(super) fn bvp(cfg: &SolverConfig) -> Result<CaseOutcome> {
    let f: VectorField = nakao_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let (reference, radius) = nakao_reference();
    let mut cert = Certificate::new("bvp-nakao").with_field_hash(f.fingerprint());
    let x0 = IVec::from_points(&[reference.mid()]);
    let bx = IVec(vec![reference + radius.hull(-radius)]);
    let map = FnMap(
        |p: &IVec| Ok(IVec(vec![velocity_at_end(&solver, p[0])?])),
        |b: &IVec| {
            let d = velocity_derivative(&solver, b[0])?;
            Ok(IMat::from_fn(1, 1, |_, _| d))
        },
    );
    let verdict = interval_newton_enlarging(&map, &x0, &bx, 3)?;
    cert.extend(verdict.checks("x*"));
    let mut report = vec![format!("newton status {:?} on {}", verdict.status, fmt_iv(verdict.x[0]))];
    if verdict.zero().is_none() {
        // x -> -x maps this equation to the one with +0.4464 cos t, so the
        // mirrored box is the natural place to look; reported only.
        let mirror = interval_newton_enlarging(&map, &IVec::from_points(&[-reference.mid()]), &IVec(vec![-bx[0]]), 3)?;
        report.push(format!(
            "F({}) = {}; mirrored box {}: newton status {:?}{}",
            reference,
            fmt_iv(velocity_at_end(&solver, reference)?),
            fmt_iv(-bx[0]),
            mirror.status,
            mirror.zero().map_or(String::new(), |z| format!(", zero in {}", fmt_iv(z[0])))
        ));
    }
    let mut rows = Vec::new();
    if let Some(zero) = verdict.zero() {
        let offset = zero[0] - reference;
        cert.push(Check::new("x* + 0.5072 below radius", offset, Relation::Lt, radius.lo()));
        cert.push(Check::new("x* + 0.5072 above -radius", offset, Relation::Gt, -radius.lo()));
        report.push(format!("x* in {}", fmt_iv(zero[0])));
        rows.push(EnclosureRow::new("x*", &IVec(vec![zero[0], Interval::ZERO])));
    }
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}
