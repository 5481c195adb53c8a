//! The same initial segment of `x'' = -sin x`, carried as a doubleton and
//! as a plain box.

use super::constants::*;
use super::{fmt_iv, CaseOutcome, EnclosureRow};
use crate::error::Result;
use crate::interval::Interval;
use crate::linalg::{IMat, IVec};
use crate::sets::{BoxSet, DoubletonSet, FlowSet};
use crate::solver::{Solver, SolverConfig};
use crate::verify::{Certificate, Check, Relation};

/// `(doubleton hull, box hull)` at `T = 2`.
pub(crate) fn hulls(cfg: &SolverConfig) -> Result<(IVec, IVec)> {
    let f = pendulum_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let x0 = IVec::from_points(&[2.5, 2.5]);
    let c = IMat::from_f64_rows(&[&[1.0, 1.0], &[-1.0, 1.0]]);
    let r0 = IVec(vec![Interval::symmetric(0.5), Interval::ZERO]);
    let mut s1 = DoubletonSet::from_affine(&x0, &c, &r0)?;
    let mut s2 = BoxSet::new(IVec(vec![Interval::new(2.0, 3.0); 2]));
    let t_end = Interval::point(PENDULUM_TIME);
    solver.integrate_to(&mut s1, Interval::ZERO, t_end)?;
    solver.integrate_to(&mut s2, Interval::ZERO, t_end)?;
    Ok((s1.hull(), s2.hull()))
}

pub(super) fn representation(cfg: &SolverConfig) -> Result<CaseOutcome> {
    let f = pendulum_field();
    let (doubleton, boxed) = hulls(cfg)?;
    let mut cert = Certificate::new("pendulum-repr").with_field_hash(f.fingerprint());
    for (i, name) in ["x", "x'"].iter().enumerate() {
        cert.push(Check::new(
            format!("box minus doubleton hull diameter in {name}"),
            Interval::point(boxed[i].diam()) - Interval::point(doubleton[i].diam()),
            Relation::Gt,
            0.0,
        ));
    }
    let report = vec![
        format!("doubleton: x in {}, x' in {}", fmt_iv(doubleton[0]), fmt_iv(doubleton[1])),
        format!("box:       x in {}, x' in {}", fmt_iv(boxed[0]), fmt_iv(boxed[1])),
    ];
    let rows = vec![EnclosureRow::new("doubleton", &doubleton), EnclosureRow::new("box", &boxed)];
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}
