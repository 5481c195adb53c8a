//! The seven case studies: fields, constants and orchestration that turn
//! integrations into certificates.

mod constants;
mod lorenz;
mod michelson;
mod nakao;
mod pendulum;
mod rossler;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::IVec;
use crate::solver::SolverConfig;
use crate::verify::{Certificate, Check, Relation};

pub use constants::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    MichelsonSymmetric,
    RosslerTrap,
    RosslerPeriodic,
    RosslerHorseshoe,
    BvpNakao,
    LorenzCoords,
    PendulumRepr,
}

impl CaseKind {
    pub const ALL: [CaseKind; 7] = [
        CaseKind::MichelsonSymmetric,
        CaseKind::RosslerTrap,
        CaseKind::RosslerPeriodic,
        CaseKind::RosslerHorseshoe,
        CaseKind::BvpNakao,
        CaseKind::LorenzCoords,
        CaseKind::PendulumRepr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::MichelsonSymmetric => "michelson-symmetric",
            CaseKind::RosslerTrap => "rossler-trap",
            CaseKind::RosslerPeriodic => "rossler-periodic",
            CaseKind::RosslerHorseshoe => "rossler-horseshoe",
            CaseKind::BvpNakao => "bvp-nakao",
            CaseKind::LorenzCoords => "lorenz-coords",
            CaseKind::PendulumRepr => "pendulum-repr",
        }
    }

    /// Solver settings each case was tuned with.
    pub fn default_solver(self) -> SolverConfig {
        let base = SolverConfig::default();
        match self {
            CaseKind::RosslerTrap | CaseKind::RosslerHorseshoe => base.with_order(16).with_tolerance(1e-9),
            CaseKind::RosslerPeriodic => base.with_order(30).with_tolerance(1e-14),
            CaseKind::MichelsonSymmetric => base.with_order(20).with_tolerance(1e-12),
            CaseKind::BvpNakao => base.with_order(20).with_tolerance(1e-12).with_h_max(0.25),
            CaseKind::LorenzCoords => base.with_order(20).with_tolerance(1e-12).with_h_max(0.05),
            CaseKind::PendulumRepr => base.with_order(20).with_tolerance(1e-12).with_h_max(0.1),
        }
    }

    pub fn default_subdivisions(self) -> usize {
        match self {
            CaseKind::RosslerTrap => 200,
            CaseKind::RosslerHorseshoe => 4,
            CaseKind::LorenzCoords => 8,
            _ => 1,
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown case {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct CaseConfig {
    pub case: CaseKind,
    pub order: Option<usize>,
    pub tolerance: Option<f64>,
    pub subdivisions: Option<usize>,
}

impl CaseConfig {
    pub fn new(case: CaseKind) -> Self {
        CaseConfig { case, order: None, tolerance: None, subdivisions: None }
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let mut cfg = self.case.default_solver();
        if let Some(p) = self.order {
            cfg.order = p;
        }
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn subdivisions(&self) -> Result<usize> {
        let n = self.subdivisions.unwrap_or_else(|| self.case.default_subdivisions());
        if n == 0 {
            return Err(Error::InvalidConfig("subdivisions must be at least 1".into()));
        }
        Ok(n)
    }
}

/// One rectangle for external plotting, in the case's 2D coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EnclosureRow {
    pub piece_id: String,
    pub x: Interval,
    pub y: Interval,
}

impl EnclosureRow {
    fn new(piece_id: impl ToString, hull: &IVec) -> Self {
        EnclosureRow { piece_id: piece_id.to_string(), x: hull[0], y: hull[1] }
    }
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub certificate: Certificate,
    pub enclosures: Vec<EnclosureRow>,
    /// Human-readable summary lines.
    pub report: Vec<String>,
}

pub fn run_case(cfg: &CaseConfig) -> Result<CaseOutcome> {
    let solver = cfg.solver()?;
    let n = cfg.subdivisions()?;
    let mut out = match cfg.case {
        CaseKind::RosslerTrap => rossler::trap(&solver, n)?,
        CaseKind::RosslerPeriodic => rossler::periodic(&solver)?,
        CaseKind::RosslerHorseshoe => rossler::horseshoe(&solver, n)?,
        CaseKind::MichelsonSymmetric => michelson::symmetric(&solver)?,
        CaseKind::BvpNakao => nakao::bvp(&solver)?,
        CaseKind::LorenzCoords => lorenz::coords(&solver, n)?,
        CaseKind::PendulumRepr => pendulum::representation(&solver)?,
    };
    let cert = &mut out.certificate;
    cert.set_config("case", cfg.case);
    cert.set_config("order", solver.order);
    cert.set_config("tolerance", format!("{:e}", solver.tolerance));
    cert.set_config("h_min", format!("{:e}", solver.h_min));
    cert.set_config("h_max", solver.h_max);
    cert.set_config("subdivisions", n);
    Ok(out)
}

/// CSV with header `case,piece_id,x_lo,x_hi,y_lo,y_hi`.
pub fn emit_enclosures(case: CaseKind, rows: &[EnclosureRow], out: impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "piece_id", "x_lo", "x_hi", "y_lo", "y_hi"]).map_err(io)?;
    for r in rows {
        w.write_record([
            case.name().to_string(),
            r.piece_id.clone(),
            format!("{:.16e}", r.x.lo()),
            format!("{:.16e}", r.x.hi()),
            format!("{:.16e}", r.y.lo()),
            format!("{:.16e}", r.y.hi()),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// `inner ⊂ int(outer)` as four strict checks, with thresholds rounded so
/// that passing implies inclusion in the exact decimal box.
fn interior_checks(label: &str, inner: &IVec, outer: &[Interval], names: &[&str]) -> Vec<Check> {
    let mut out = Vec::new();
    for (i, name) in names.iter().enumerate() {
        out.push(Check::new(format!("{label}: {name} lower"), inner[i], Relation::Gt, outer[i].lo()));
        out.push(Check::new(format!("{label}: {name} upper"), inner[i], Relation::Lt, outer[i].hi()));
    }
    out
}

fn fmt_iv(x: Interval) -> String {
    format!("[{:.17e}, {:.17e}]", x.lo(), x.hi())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_names_round_trip() {
        for c in CaseKind::ALL {
            assert_eq!(c.name().parse::<CaseKind>().unwrap(), c);
        }
        assert!("rossler".parse::<CaseKind>().is_err());
    }

    #[test]
    fn zero_subdivisions_rejected() {
        let mut cfg = CaseConfig::new(CaseKind::RosslerTrap);
        cfg.subdivisions = Some(0);
        assert!(run_case(&cfg).is_err());
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        emit_enclosures(CaseKind::RosslerTrap, &[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "case,piece_id,x_lo,x_hi,y_lo,y_hi\n");
    }
}
