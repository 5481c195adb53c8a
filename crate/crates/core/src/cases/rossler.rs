//! Rössler return map on `x = 0` with `x' > 0`: trapping region, periodic
//! points and the horseshoe.

use super::constants::*;
use super::{fmt_iv, interior_checks, CaseOutcome, EnclosureRow};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{IMat, IVec};
use crate::poincare::{Direction, PoincareMap, Section};
use crate::sets::{C1DoubletonSet, FlowSet};
use crate::solver::{Solver, SolverConfig};
use crate::verify::{
    cone_condition, cone_matrix, covering_check, interval_newton_enlarging, posdef_checks, saddle_verdict, Certificate, Check, Edge,
    FnMap, NewtonStatus, Relation,
};

pub(crate) fn section() -> Section {
    Section::coordinate(3, 0, Interval::ZERO, Direction::Positive)
}

/// `P^m` of a chart box (C0).
pub(crate) fn image_hull(pm: &PoincareMap, chart_box: &IVec, m: usize) -> Result<IVec> {
    let set = pm.section().embed_box(chart_box)?;
    Ok(pm.poincare_map(&set, m)?.image.hull())
}

/// `DP^m` over a chart box, in chart coordinates.
pub(crate) fn derivative(pm: &PoincareMap, chart_box: &IVec, m: usize) -> Result<IMat> {
    let base = pm.section().embed_box(chart_box)?;
    let set = C1DoubletonSet::new(base, &IMat::identity(3));
    Ok(pm.poincare_derivative(&set, m)?.dp.expect("C1 run yields a derivative"))
}

pub(super) fn trap(cfg: &SolverConfig, n: usize) -> Result<CaseOutcome> {
    let f = rossler_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let pm = PoincareMap::new(&solver, section());
    let w = rossler_w();
    let mut cert = Certificate::new("rossler-trap").with_field_hash(f.fingerprint());
    cert.push(Check::new("x' = -(y+z) on W", -(w[0] + w[1]), Relation::Gt, 0.0));
    let mut rows = Vec::new();
    let mut worst = [f64::INFINITY; 4];
    for (i, yi) in w[0].subdivide(n).into_iter().enumerate() {
        let hull = image_hull(&pm, &IVec(vec![yi, w[1]]), 1).map_err(|e| e.in_piece(format!("piece {i} y={yi}")))?;
        cert.extend(interior_checks(&format!("piece {i}"), &hull, &w, &["y", "z"]));
        worst[0] = worst[0].min(hull[0].lo() - w[0].lo());
        worst[1] = worst[1].min(w[0].hi() - hull[0].hi());
        worst[2] = worst[2].min(hull[1].lo() - w[1].lo());
        worst[3] = worst[3].min(w[1].hi() - hull[1].hi());
        rows.push(EnclosureRow::new(i, &hull));
    }
    let report = vec![
        format!("pieces: {n}"),
        format!("smallest margins to the boundary of W (y lo, y hi, z lo, z hi): {:.3e} {:.3e} {:.3e} {:.3e}", worst[0], worst[1], worst[2], worst[3]),
    ];
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}

pub(super) fn periodic(cfg: &SolverConfig) -> Result<CaseOutcome> {
    let f = rossler_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let pm = PoincareMap::new(&solver, section());
    let mut cert = Certificate::new("rossler-periodic").with_field_hash(f.fingerprint());
    let mut report = Vec::new();
    let mut rows = Vec::new();
    let mut zeros: Vec<IVec> = Vec::new();
    for m in 1..=3usize {
        let u = rossler_periodic_point(m);
        let x0 = IVec::from_points(&[u[0].mid(), u[1].mid()]);
        let bx: IVec = u.iter().map(|&c| c + Interval::symmetric(1e-10)).collect();
        let map = FnMap(
            |p: &IVec| Ok(&image_hull(&pm, p, m)? - p),
            |b: &IVec| {
                let dp = derivative(&pm, b, m)?;
                Ok(&dp - &IMat::identity(2))
            },
        );
        let label = format!("u{m}");
        let verdict = interval_newton_enlarging(&map, &x0, &bx, 3).map_err(|e| e.in_piece(&label))?;
        cert.extend(verdict.checks(&label));
        let Some(zero) = verdict.zero().cloned() else {
            report.push(format!("{label}: newton {:?}", verdict.status));
            zeros.push(bx);
            continue;
        };
        let diam = zero.max_diam();
        cert.push(Check::new(format!("{label}: refined diameter"), Interval::point(diam), Relation::Lt, 1e-12));
        let dp = derivative(&pm, &zero, m).map_err(|e| e.in_piece(&label))?;
        let saddle = saddle_verdict(&label, &dp)?;
        for mut c in saddle.checks {
            c.description = format!("{label}: {}", c.description);
            cert.push(c);
        }
        report.push(format!(
            "{label}: unique zero in y {} z {}, diameter {diam:.3e}, DP diag {} {}",
            fmt_iv(zero[0]),
            fmt_iv(zero[1]),
            fmt_iv(dp[(0, 0)]),
            fmt_iv(dp[(1, 1)])
        ));
        rows.push(EnclosureRow::new(&label, &zero));
        zeros.push(zero);
        debug_assert_eq!(verdict.status, NewtonStatus::UniqueZero);
    }
    for a in 0..zeros.len() {
        for b in a + 1..zeros.len() {
            // Separate along the coordinate with the larger gap.
            let gaps: Vec<Interval> = (0..2).map(|i| zeros[a][i] - zeros[b][i]).collect();
            let i = if gaps[0].mig() / zeros[a][0].mag().max(1e-300) >= gaps[1].mig() / zeros[a][1].mag().max(1e-300) { 0 } else { 1 };
            let op = if gaps[i].mid() > 0.0 { Relation::Gt } else { Relation::Lt };
            cert.push(Check::new(format!("u{} and u{} disjoint in coordinate {i}", a + 1, b + 1), gaps[i], op, 0.0));
        }
    }
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}

pub(super) fn horseshoe(cfg: &SolverConfig, n: usize) -> Result<CaseOutcome> {
    let f = rossler_field();
    let solver = Solver::new(&f, cfg.clone())?;
    let pm = PoincareMap::new(&solver, section());
    let pm_ref = &pm;
    let [_, z] = rossler_w();
    let [l_m, r_m, l_n, r_n] = horseshoe_edges();
    let mut cert = Certificate::new("rossler-horseshoe").with_field_hash(f.fingerprint());

    let edge = |name: &str, y: Interval, op: Relation, threshold: f64| Edge {
        description: format!("pi_y P^2({name} x Z)"),
        param: z,
        project: 0,
        op,
        threshold,
        image: Box::new(move |zp: Interval| image_hull(pm_ref, &IVec(vec![y, zp]), 2)),
    };
    // Thresholds rounded so that the strict float check implies the exact one.
    let edges = vec![
        edge("l_M", l_m, Relation::Lt, l_m.lo()),
        edge("r_M", r_m, Relation::Gt, r_n.hi()),
        edge("r_N", r_n, Relation::Lt, l_m.lo()),
        edge("l_N", l_n, Relation::Gt, r_n.hi()),
    ];
    let (covering, pieces) = covering_check("covering", &edges, n, 12);
    let rows: Vec<EnclosureRow> = pieces
        .iter()
        .filter_map(|p| p.hull.as_ref().map(|h| EnclosureRow::new(format!("edge{}-{}", p.edge, p.param), h)))
        .collect();
    let edge_pieces = pieces.len();
    cert.absorb(covering);

    let m_box = [l_m.hull(r_m), z];
    let n_box = [l_n.hull(r_n), z];
    let (matrices, failed) = cone_cover(&pm, &[m_box, n_box], n, 10)?;
    let cone = cone_condition("cone", &matrices, CONE_LAMBDA, CONE_MU)?;
    cert.absorb(cone);
    for (label, m) in failed {
        cert.extend(posdef_checks(&format!("{label} (depth limit)"), &m));
    }
    let report = vec![
        format!("edge pieces: {edge_pieces}"),
        format!("cone pieces: {}", matrices.len()),
    ];
    Ok(CaseOutcome { certificate: cert, enclosures: rows, report })
}

/// Adaptive cover of the boxes on which the cone form is positive definite.
/// Pieces are bisected in `y` only: the width of `DP²` comes almost entirely
/// from the `y` extent. Returns the derivative enclosures of the accepted
/// pieces and the cone matrices of pieces that still failed at `max_depth`.
fn cone_cover(pm: &PoincareMap, boxes: &[[Interval; 2]], n: usize, max_depth: usize) -> Result<(Vec<IMat>, Vec<(String, IMat)>)> {
    let mut accepted = Vec::new();
    let mut failed = Vec::new();
    for whole in boxes {
        let mut stack: Vec<([Interval; 2], usize)> =
            whole[0].subdivide(n).into_iter().rev().map(|y| ([y, whole[1]], 0)).collect();
        while let Some((b, depth)) = stack.pop() {
            let piece = IVec(b.to_vec());
            let dp = derivative(pm, &piece, 2);
            let ok = match &dp {
                Ok(a) => posdef_checks("", &cone_matrix(a, CONE_LAMBDA, CONE_MU)?).iter().all(|c| c.pass),
                Err(_) => false,
            };
            if ok {
                accepted.push(dp?);
            } else if depth >= max_depth {
                let label = format!("cone piece {} x {}", b[0], b[1]);
                match dp {
                    Ok(a) => failed.push((label, cone_matrix(&a, CONE_LAMBDA, CONE_MU)?)),
                    Err(e) => return Err(Error::DepthLimit(format!("{label}: {e}"))),
                }
            } else {
                let (lo, hi) = b[0].split();
                let (mut p, mut q) = (b, b);
                p[0] = lo;
                q[0] = hi;
                stack.push((q, depth + 1));
                stack.push((p, depth + 1));
            }
        }
    }
    Ok((accepted, failed))
}
