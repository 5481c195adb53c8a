//! Lorenz second return to `z = 27` in rotated coordinates. The rotation
//! `Q_α⁻¹` is applied either to the doubleton before hulling (single
//! routine) or to the hull afterwards (pipelined); only the first is tight
//! enough for `|π_y| < 3.6`.

use super::constants::*;
use super::{fmt_iv, CaseOutcome, EnclosureRow};
use crate::error::Result;
use crate::interval::Interval;
use crate::linalg::{matvec, IMat, IVec};
use crate::poincare::{Direction, PoincareMap, Section};
use crate::sets::FlowSet;
use crate::solver::{Solver, SolverConfig};
use crate::verify::{Certificate, Check, Relation};

pub(crate) fn section() -> Section {
    Section::coordinate(3, 2, Interval::point(LORENZ_SECTION_Z), Direction::Both)
}

pub(crate) fn q_alpha_inverse() -> IMat {
    let (c, s) = (lorenz_alpha().cos(), lorenz_alpha().sin());
    IMat::from_rows(&[vec![c, s], vec![-s, c]]).expect("2x2")
}

/// `(single routine, pipelined)` bounds on `π_y Q_α⁻¹ P²(Q_α(s, 0))`.
pub(crate) fn bounds(pm: &PoincareMap, s: Interval) -> Result<(Interval, Interval, IVec)> {
    let (c, sn) = (lorenz_alpha().cos(), lorenz_alpha().sin());
    let (mid, spread) = s.centered();
    let u0 = IVec(vec![c.mul_scalar(mid), sn.mul_scalar(mid)]);
    let dir = IMat::from_rows(&[vec![c], vec![sn]])?;
    let start = pm.section().embed_affine(&u0, &dir, &IVec(vec![spread]))?;
    let r = pm.poincare_map(&start, 2)?;
    let qinv = q_alpha_inverse();
    let single = r.image.linear_image(&qinv)?.hull();
    let pipelined = matvec(&qinv, &r.image.hull())?;
    Ok((single[1], pipelined[1], r.image.hull()))
}

pub(super) fn coords(cfg: &SolverConfig, n: usize) -> Result<CaseOutcome> {
    let f = lorenz_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let pm = PoincareMap::new(&solver, section());
    let mut cert = Certificate::new("lorenz-coords").with_field_hash(f.fingerprint());
    let mut rows = Vec::new();
    let mut single_all: Option<Interval> = None;
    let mut piped_all: Option<Interval> = None;
    for (i, s) in lorenz_s().subdivide(n).into_iter().enumerate() {
        let (single, piped, hull) = bounds(&pm, s).map_err(|e| e.in_piece(format!("s piece {i} {s}")))?;
        cert.push(Check::new(format!("piece {i}: pi_y (Q^-1 P^2) upper"), single, Relation::Lt, LORENZ_BOUND));
        cert.push(Check::new(format!("piece {i}: pi_y (Q^-1 P^2) lower"), single, Relation::Gt, -LORENZ_BOUND));
        single_all = Some(single_all.map_or(single, |a| a.hull(single)));
        piped_all = Some(piped_all.map_or(piped, |a| a.hull(piped)));
        rows.push(EnclosureRow::new(i, &hull));
    }
    let (single, piped) = (single_all.expect("n >= 1"), piped_all.expect("n >= 1"));
    cert.push(Check::new(
        "pipelined width minus single-routine width",
        Interval::point(piped.diam()) - Interval::point(single.diam()),
        Relation::Gt,
        0.0,
    ));
    let report = vec![
        format!("single routine  pi_y Q^-1 P^2 in {}", fmt_iv(single)),
        format!("pipelined       pi_y Q^-1 [P^2] in {}", fmt_iv(piped)),
    ];
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}
