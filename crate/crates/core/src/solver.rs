//! Validated Taylor-method time stepping.
//!
//! One step from a set `S` at time `t0` is assembled from four pieces:
//!
//! * a rough enclosure `Z` with `hull(S) + [0,h]·f(t0+[0,h], Z) ⊆ Z`, so
//!   every trajectory stays in `Z` during the step;
//! * the Taylor coefficients `x_[0..=p]` at the set's center;
//! * the coefficients `V_[0..=p]` of the variational equation over
//!   `hull(S)`, giving the Jacobian `A = Σ V_[k] h^k` of the Taylor map;
//! * the Lagrange remainder `h^{p+1}·x_[p+1](t0+[0,h], Z)`.
//!
//! The set is then advanced by the affine rule of [`FlowSet`].

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::interval::Interval;
use crate::linalg::{matmul, IMat, IVec};
use crate::sets::FlowSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub order: usize,
    pub tolerance: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { order: 20, tolerance: 1e-10, h_min: 1e-8, h_max: 0.5, max_steps: 1_000_000 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidConfig(format!("order must be at least 2, got {}", self.order)));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.h_min > 0.0 && self.h_min < self.h_max && self.h_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("need 0 < h_min < h_max, got {} and {}", self.h_min, self.h_max)));
        }
        Ok(())
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

/// A validated a-priori bound for one step.
#[derive(Debug, Clone)]
pub struct FlowEnclosure {
    /// Validated candidate: `hull + [0,h]·f(t+[0,h], z) ⊆ z`.
    pub z: IVec,
    /// Its Picard image `hull + [0,h]·f(t+[0,h], z)`, also a valid and
    /// tighter enclosure.
    pub tight: IVec,
    pub h: f64,
}

/// Everything needed to advance a set by any step `h ⊆ [0, self.h]`.
#[derive(Debug, Clone)]
pub struct StepPlan {
    pub t0: Interval,
    pub h: f64,
    pub enclosure: IVec,
    center_jet: Vec<IVec>,
    jac_jet: Vec<IMat>,
    rem_coeff: IVec,
    var_rem: Option<IMat>,
    order: usize,
}

fn horner_vec(coeffs: &[IVec], h: Interval) -> IVec {
    let mut acc = coeffs.last().expect("nonempty jet").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = c + &acc.scale(h);
    }
    acc
}

fn horner_mat(coeffs: &[IMat], h: Interval) -> IMat {
    let mut acc = coeffs.last().expect("nonempty jet").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = c + &acc.scale(h);
    }
    acc
}

impl StepPlan {
    fn check(&self, h: Interval) {
        debug_assert!(h.lo() >= 0.0 && h.hi() <= self.h, "step {h} outside validated [0, {}]", self.h);
    }

    /// Taylor polynomial at the center, evaluated at `h`.
    pub fn center_image(&self, h: Interval) -> IVec {
        self.check(h);
        horner_vec(&self.center_jet, h)
    }

    /// Jacobian of the Taylor polynomial over the set's hull.
    pub fn jacobian(&self, h: Interval) -> IMat {
        self.check(h);
        horner_mat(&self.jac_jet, h)
    }

    pub fn remainder(&self, h: Interval) -> IVec {
        self.check(h);
        self.rem_coeff.scale(h.pow_int(self.order as u32 + 1))
    }

    /// Enclosure of `D_x φ(h, x)` for every `x` in the set.
    pub fn c1_jacobian(&self, h: Interval) -> Option<IMat> {
        let rem = self.var_rem.as_ref()?;
        Some(&self.jacobian(h) + &rem.scale(h.pow_int(self.order as u32 + 1)))
    }

    /// Enclosure of the set's trajectories at every time in `t0 + h`
    /// (hull only).
    pub fn hull_at(&self, set_hull: &IVec, center: &IVec, h: Interval) -> IVec {
        let a = self.jacobian(h);
        let delta = set_hull - center;
        let y = &self.center_image(h) + &self.remainder(h);
        let image = &y + &crate::linalg::matvec(&a, &delta).expect("conforming");
        image.intersect(&self.enclosure).unwrap_or(image)
    }
}

pub struct Solver<'f> {
    field: &'f VectorField,
    cfg: SolverConfig,
}

impl<'f> Solver<'f> {
    pub fn new(field: &'f VectorField, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Solver { field, cfg })
    }

    pub fn field(&self) -> &VectorField {
        self.field
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Step size suggested by the last two Taylor coefficients.
    pub fn suggest_step(&self, jet: &[IVec]) -> f64 {
        let p = jet.len() - 1;
        let mut h = self.cfg.h_max;
        for k in [p, p - 1] {
            let norm = jet[k].norm_inf();
            if norm > 0.0 {
                h = h.min((self.cfg.tolerance / norm).powf(1.0 / k as f64));
            }
        }
        h.clamp(self.cfg.h_min, self.cfg.h_max)
    }

    /// Picard-inclusion enclosure for a step starting at `t` from `hull`.
    pub fn rough_enclosure(&self, t: Interval, hull: &IVec, h: f64) -> Result<FlowEnclosure> {
        let mut h = h;
        let mut attempts = 0;
        while attempts < 30 {
            if h < self.cfg.h_min {
                break;
            }
            let span = Interval::new(0.0, h);
            let times = t + span;
            let picard = |z: &IVec| -> Result<IVec> { Ok(hull + &self.field.eval(times, z)?.scale(span)) };
            let mut candidate = match picard(hull) {
                Ok(first) => inflate(&first),
                Err(_) => {
                    attempts += 1;
                    h *= 0.5;
                    continue;
                }
            };
            for _ in 0..3 {
                attempts += 1;
                match picard(&candidate) {
                    Ok(image) if image.subset(&candidate) => {
                        return Ok(FlowEnclosure { z: candidate, tight: image, h });
                    }
                    Ok(image) => candidate = inflate(&image.hull(&candidate)),
                    Err(_) => break,
                }
            }
            h *= 0.5;
        }
        Err(Error::StepTooSmall { h, t: t.mid() })
    }

    /// Builds the step data for `set` at time `t`. `h_request` caps the step;
    /// the returned plan may use a smaller validated step.
    pub fn plan<S: FlowSet>(&self, set: &S, t: Interval, h_request: Option<f64>) -> Result<StepPlan> {
        let p = self.cfg.order;
        let n = set.dim();
        let center = set.center();
        let hull = set.hull();
        let center_jet = self.field.ode_taylor(t, &center, p)?;
        let mut h = self.suggest_step(&center_jet);
        if let Some(cap) = h_request {
            h = h.min(cap);
        }
        let rough = self.rough_enclosure(t, &hull, h)?;
        let h = rough.h;
        let span = t + Interval::new(0.0, h);
        let z = rough.tight;

        let (rem_coeff, var_rem) = if set.wants_c1() {
            let jets = self.field.variational_taylor(span, &z, &IMat::identity(n), p + 1)?;
            let w = self.variational_bound(span, &z, h)?;
            let v = jets.v.expect("tangents");
            let vrem = matmul(&v[p + 1], &w)?;
            (jets.x[p + 1].clone(), Some(vrem))
        } else {
            (self.field.ode_taylor(span, &z, p + 1)?[p + 1].clone(), None)
        };
        let jac = self.field.variational_taylor(t, &hull, &IMat::identity(n), p)?;
        Ok(StepPlan {
            t0: t,
            h,
            enclosure: z,
            center_jet,
            jac_jet: jac.v.expect("tangents"),
            rem_coeff,
            var_rem,
            order: p,
        })
    }

    /// Entrywise bound on `D_x φ(s, x)` for `s ∈ [0,h]`, `x(s) ∈ z`.
    fn variational_bound(&self, span: Interval, z: &IVec, h: f64) -> Result<IMat> {
        let n = z.len();
        let j = self.field.jacobian(span, z)?;
        let lh = Interval::point(j.norm_inf()).mul_scalar(h);
        let e = lh.exp().hi();
        let mut w = IMat::from_fn(n, n, |_, _| Interval::symmetric(e));
        let step = Interval::new(0.0, h);
        for _ in 0..3 {
            let next = &IMat::identity(n) + &matmul(&j, &w)?.scale(step);
            w = IMat::from_fn(n, n, |r, c| w[(r, c)].intersect(next[(r, c)]).unwrap_or(next[(r, c)]));
        }
        Ok(w)
    }

    /// Advances `set` by `h` (which may be an interval of times inside the
    /// validated range of `plan`).
    pub fn advance<S: FlowSet>(&self, set: &mut S, plan: &StepPlan, h: Interval) -> Result<()> {
        if set.wants_c1() {
            let dphi = plan.c1_jacobian(h).ok_or_else(|| Error::InvalidConfig("plan built without C1 data".into()))?;
            set.advance_c1(&dphi)?;
        }
        let y = &plan.center_image(h) + &plan.remainder(h);
        set.affine_advance(&plan.jacobian(h), &y)
    }

    /// One accepted step; returns the step length taken.
    pub fn step<S: FlowSet>(&self, set: &mut S, t: &mut Interval, h_request: Option<f64>) -> Result<f64> {
        let plan = self.plan(set, *t, h_request)?;
        self.advance(set, &plan, Interval::point(plan.h))?;
        *t += Interval::point(plan.h);
        Ok(plan.h)
    }

    /// Integrates from time `t0` to `t_end`. The last step has interval
    /// length `t_end − t` so that non-representable end times are exact.
    pub fn integrate_to<S: FlowSet>(&self, set: &mut S, t0: Interval, t_end: Interval) -> Result<()> {
        let mut t = t0;
        let mut steps = 0;
        loop {
            if steps >= self.cfg.max_steps {
                return Err(Error::MaxStepsExceeded(self.cfg.max_steps));
            }
            steps += 1;
            let remaining = t_end - t;
            if remaining.hi() <= 0.0 {
                return Ok(());
            }
            // Rounding in t can leave a sliver shorter than h_min; the plan
            // is then simply longer than needed.
            let plan = self.plan(set, t, Some(remaining.hi().max(self.cfg.h_min)))?;
            if plan.h >= remaining.hi() {
                let last = Interval::new(remaining.lo().max(0.0), remaining.hi());
                self.advance(set, &plan, last)?;
                return Ok(());
            }
            self.advance(set, &plan, Interval::point(plan.h))?;
            t += Interval::point(plan.h);
        }
    }
}

/// Widens every coordinate by 10% of its diameter plus a tiny absolute and
/// relative slack.
// The shared term keeps a nearly stationary coordinate from trailing the
// growth of the coordinates it depends on.
fn inflate(v: &IVec) -> IVec {
    let widest = v.iter().map(|x| x.diam()).fold(0.0, f64::max);
    v.iter().map(|x| x.inflate(0.1 * x.diam() + 0.01 * widest + 1e-15 * x.mag() + 1e-300)).collect()
}
