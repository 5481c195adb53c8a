//! Rigorous Poincaré return maps.
//!
//! The set is integrated until its rough enclosure touches the section with
//! an admissible, strictly signed normal velocity. The crossing time is then
//! bracketed from the normal velocity bounds, narrowed by an interval Newton
//! iteration on `s ↦ S(φ(s, ·))`, and the set at the midpoint time `t_m` is
//! pushed onto the section by the exact projection
//!
//! ```text
//! P(x) = Y − G(ξ)·S(Y),   Y = φ(t_m, x),   G = f / ⟨n, f⟩
//! ```
//!
//! applied at the representation level. The derivative uses the standard
//! formula `DP = Eᵀ (I − G nᵀ) D_xφ E` with `E` the chart basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{matmul, matvec, IMat, IVec};
use crate::sets::{C1DoubletonSet, DoubletonSet, FlowSet};
use crate::solver::{Solver, StepPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `⟨n, f⟩ > 0` at the crossing.
    Positive,
    Negative,
    Both,
}

impl Direction {
    fn admits(self, sign: i8) -> bool {
        match self {
            Direction::Positive => sign > 0,
            Direction::Negative => sign < 0,
            Direction::Both => sign != 0,
        }
    }
}

/// `{x : ⟨n, x − o⟩ = 0}` with a fixed chart basis `E` of the normal's
/// complement.
#[derive(Debug, Clone)]
pub struct Section {
    normal: IVec,
    origin: IVec,
    chart: IMat,
    coordinate: Option<usize>,
    direction: Direction,
}

impl Section {
    /// `x_index = value`; the chart drops coordinate `index`.
    pub fn coordinate(dim: usize, index: usize, value: Interval, direction: Direction) -> Section {
        assert!(index < dim && dim >= 2);
        let mut normal = IVec::zeros(dim);
        normal[index] = Interval::ONE;
        let mut origin = IVec::zeros(dim);
        origin[index] = value;
        let others: Vec<usize> = (0..dim).filter(|&j| j != index).collect();
        let chart = IMat::from_fn(dim, dim - 1, |i, j| if others[j] == i { Interval::ONE } else { Interval::ZERO });
        Section { normal, origin, chart, coordinate: Some(index), direction }
    }

    /// `⟨normal, x − origin⟩ = 0` with an orthonormal chart of the normal's
    /// complement computed once here.
    pub fn affine(normal: &[f64], origin: &[f64], direction: Direction) -> Result<Section> {
        let n = normal.len();
        if origin.len() != n || n < 2 {
            return Err(Error::DimensionMismatch("section normal and origin".into()));
        }
        let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidConfig("section normal must be nonzero".into()));
        }
        let mut m = DMatrix::<f64>::identity(n, n);
        m.set_column(0, &nalgebra::DVector::from_column_slice(normal));
        // Make the remaining columns independent of the normal before QR.
        let pivot = (0..n).max_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs())).unwrap();
        let mut col = 1;
        for e in 0..n {
            if e == pivot {
                continue;
            }
            let mut v = nalgebra::DVector::zeros(n);
            v[e] = 1.0;
            m.set_column(col, &v);
            col += 1;
        }
        let q = m.qr().q();
        let chart = IMat::from_fn(n, n - 1, |i, j| Interval::point(q[(i, j + 1)]));
        Ok(Section { normal: IVec::from_points(normal), origin: IVec::from_points(origin), chart, coordinate: None, direction })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn with_direction(mut self, direction: Direction) -> Section {
        self.direction = direction;
        self
    }

    pub fn chart(&self) -> &IMat {
        &self.chart
    }

    /// `S(x)`.
    pub fn value(&self, x: &IVec) -> Interval {
        match self.coordinate {
            Some(i) => x[i] - self.origin[i],
            None => self.normal.dot(&(x - &self.origin)),
        }
    }

    /// `⟨∇S, v⟩`.
    pub fn normal_component(&self, v: &IVec) -> Interval {
        match self.coordinate {
            Some(i) => v[i],
            None => self.normal.dot(v),
        }
    }

    pub fn value_f64(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).zip(self.origin.iter()).map(|((n, xi), o)| n.mid() * (xi - o.mid())).sum()
    }

    pub fn normal_component_f64(&self, v: &[f64]) -> f64 {
        self.normal.iter().zip(v).map(|(n, vi)| n.mid() * vi).sum()
    }

    /// Chart coordinates `Eᵀ(x − o)`.
    pub fn to_chart(&self, x: &IVec) -> IVec {
        match self.coordinate {
            Some(i) => (0..x.len()).filter(|&j| j != i).map(|j| x[j]).collect(),
            None => matvec(&self.chart.transpose(), &(x - &self.origin)).expect("conforming"),
        }
    }

    /// `o + E u`.
    pub fn embed(&self, u: &IVec) -> IVec {
        &self.origin + &matvec(&self.chart, u).expect("conforming")
    }

    /// Start set `{o + E(u0 + C r0)}` given in chart coordinates.
    pub fn embed_affine(&self, u0: &IVec, c: &IMat, r0: &IVec) -> Result<DoubletonSet> {
        let x0 = self.embed(u0);
        let c_full = matmul(&self.chart, c)?;
        DoubletonSet::from_affine(&x0, &c_full, r0)
    }

    /// Chart box embedded as a doubleton (one spread column per chart axis).
    pub fn embed_box(&self, u: &IVec) -> Result<DoubletonSet> {
        let (mid, spread) = u.centered();
        self.embed_affine(&mid, &IMat::identity(u.len()), &spread)
    }
}

#[derive(Debug, Clone)]
pub struct PoincareResult {
    /// Image in chart coordinates.
    pub image: DoubletonSet,
    /// Hull of the image in the full phase space.
    pub image_full: IVec,
    /// Time of the last counted crossing, measured from the start.
    pub return_time: Interval,
    /// Derivative of the return map in chart coordinates.
    pub dp: Option<IMat>,
    /// Sign of `⟨∇S, f⟩` at each counted crossing.
    pub crossing_signs: Vec<i8>,
}

pub struct PoincareMap<'s, 'f> {
    solver: &'s Solver<'f>,
    section: Section,
    max_time: f64,
}

/// Everything about a completed crossing that the image construction needs.
struct Crossing {
    /// Relative crossing-time enclosure within the step.
    times: Interval,
    plan: StepPlan,
    sign: i8,
}

impl<'s, 'f> PoincareMap<'s, 'f> {
    pub fn new(solver: &'s Solver<'f>, section: Section) -> Self {
        PoincareMap { solver, section, max_time: 100.0 }
    }

    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = max_time;
        self
    }

    pub fn section(&self) -> &Section {
        &self.section
    }

    /// `n_iter`-th return of the set (C0).
    pub fn poincare_map<S: FlowSet>(&self, set: &S, n_iter: usize) -> Result<PoincareResult> {
        self.run(set.clone(), n_iter, |_, _, _| Ok(None))
    }

    /// `n_iter`-th return together with the derivative of the return map in
    /// chart coordinates, for a start set on this section with `V(0) = I`.
    pub fn poincare_derivative(&self, set: &C1DoubletonSet, n_iter: usize) -> Result<PoincareResult> {
        self.run(set.clone(), n_iter, |state: &C1DoubletonSet, plan: &StepPlan, times: Interval| {
            let mut at_cross = state.clone();
            self.solver.advance(&mut at_cross, plan, times)?;
            Ok(Some(at_cross.derivative()))
        })
    }

    fn run<S: FlowSet>(
        &self,
        mut set: S,
        n_iter: usize,
        derivative_at: impl Fn(&S, &StepPlan, Interval) -> Result<Option<IMat>>,
    ) -> Result<PoincareResult> {
        assert!(n_iter >= 1);
        let start = self.section.value(&set.hull());
        let threshold = 10.0 * start.diam() + 1e-6;
        let mut escaped = false;
        // After an intermediate crossing: the side the set must reach first.
        let mut required_side: Option<i8> = None;
        let mut t = Interval::ZERO;
        let mut signs = Vec::new();
        let mut steps = 0usize;

        loop {
            steps += 1;
            if steps > self.solver.config().max_steps {
                return Err(Error::MaxStepsExceeded(steps - 1));
            }
            if t.lo() > self.max_time {
                return Err(Error::NoCrossing(self.max_time));
            }
            let hull = set.hull();
            let s_now = self.section.value(&hull);
            if !escaped {
                escaped = match required_side {
                    None => s_now.mig() >= threshold,
                    Some(1) => s_now.lo() > 0.0,
                    Some(_) => s_now.hi() < 0.0,
                };
            }
            let plan = self.solver.plan(&set, t, None)?;
            if !escaped || !self.section.value(&plan.enclosure).contains_zero() {
                self.solver.advance(&mut set, &plan, Interval::point(plan.h))?;
                t += Interval::point(plan.h);
                continue;
            }
            let crossing = match self.crossing_step(&set, t, plan, s_now)? {
                Step::Advance(plan, h) => {
                    self.solver.advance(&mut set, &plan, Interval::point(h))?;
                    t += Interval::point(h);
                    continue;
                }
                Step::Cross(crossing) => self.single_step_crossing(&set, t, crossing, &derivative_at)?,
                Step::Window(sign) => self.window_crossing(&set, t, sign, &derivative_at)?,
            };
            signs.push(crossing.sign);
            if signs.len() < n_iter {
                (set, t) = crossing.after;
                escaped = false;
                required_side = Some(crossing.sign);
            } else {
                return self.finish(crossing, signs);
            }
        }
    }

    /// Decides what to do with a step whose rough enclosure meets the
    /// section.
    fn crossing_step<S: FlowSet>(&self, set: &S, t: Interval, mut plan: StepPlan, s_now: Interval) -> Result<Step> {
        let field = self.solver.field();
        let mut halvings = 0;
        loop {
            let span = t + Interval::new(0.0, plan.h);
            let d = self.section.normal_component(&field.eval(span, &plan.enclosure)?);
            let sign: i8 = if d.lo() > 0.0 {
                1
            } else if d.hi() < 0.0 {
                -1
            } else {
                0
            };
            if sign == 0 {
                halvings += 1;
                if halvings > 20 || plan.h <= self.solver.config().h_min * 2.0 {
                    return Err(Error::TransversalityFailure(format!(
                        "normal velocity {d} contains zero near t = {}",
                        t.mid()
                    )));
                }
                plan = self.solver.plan(set, t, Some(plan.h * 0.5))?;
                if !self.section.value(&plan.enclosure).contains_zero() {
                    let h = plan.h;
                    return Ok(Step::Advance(plan, h));
                }
                continue;
            }
            if !self.section.direction.admits(sign) {
                let h = plan.h;
                return Ok(Step::Advance(plan, h));
            }
            // Not yet crossed at the start: S(x) has the sign opposite to d.
            let behind = if sign > 0 { s_now.hi() < 0.0 } else { s_now.lo() > 0.0 };
            if !behind {
                return Err(Error::TransversalityFailure(format!(
                    "set straddles the section at t = {} (S = {s_now})",
                    t.mid()
                )));
            }
            let t1 = Interval::point(s_now.mig()).div(Interval::point(d.mag()))?.lo();
            let t2 = Interval::point(s_now.mag()).div(Interval::point(d.mig()))?.hi();
            if t1 >= plan.h {
                let h = plan.h;
                return Ok(Step::Advance(plan, h));
            }
            if t2 < plan.h {
                let times = self.refine_times(set, &plan, Interval::new(t1, t2))?;
                return Ok(Step::Cross(Crossing { times, plan, sign }));
            }
            // Some trajectories may cross after this step ends; try a step
            // long enough for all of them, else approach the section.
            let longer = self.solver.plan(set, t, Some((t2 * 1.05).min(self.solver.config().h_max * 4.0)))?;
            if longer.h > t2 && longer.h > plan.h {
                plan = longer;
                continue;
            }
            // Approach while that still makes real progress; otherwise the
            // crossing spans several steps.
            let h_approach = t1 * 0.999;
            if h_approach >= 0.25 * plan.h {
                return Ok(Step::Advance(plan, h_approach));
            }
            return Ok(Step::Window(sign));
        }
    }

    /// Interval Newton on `s ↦ S(φ(s, ·))` until it stops contracting by 1%.
    fn refine_times<S: FlowSet>(&self, set: &S, plan: &StepPlan, mut times: Interval) -> Result<Interval> {
        let field = self.solver.field();
        let hull = set.hull();
        let center = set.center();
        for _ in 0..20 {
            let tm = times.mid();
            let mut ym = set.clone();
            self.solver.advance(&mut ym, plan, Interval::point(tm))?;
            let g = self.section.value(&ym.hull());
            let zt = plan.hull_at(&hull, &center, times);
            let d = self.section.normal_component(&field.eval(plan.t0 + times, &zt)?);
            let Ok(step) = g.div(d) else { break };
            let newton = Interval::point(tm) - step;
            let next = match times.intersect(newton) {
                Ok(n) => n,
                Err(_) => {
                    return Err(Error::TransversalityFailure("empty crossing-time enclosure".into()));
                }
            };
            let improvement = 1.0 - next.diam() / times.diam().max(f64::MIN_POSITIVE);
            times = next;
            if improvement < 0.01 {
                break;
            }
        }
        Ok(times)
    }

    /// Crossing inside one validated step: the set at the midpoint of the
    /// refined crossing times is projected.
    fn single_step_crossing<S: FlowSet>(
        &self,
        set: &S,
        t: Interval,
        crossing: Crossing,
        derivative_at: &impl Fn(&S, &StepPlan, Interval) -> Result<Option<IMat>>,
    ) -> Result<CrossingData<S>> {
        let Crossing { times, plan, sign } = crossing;
        let mut y_m = set.clone();
        self.solver.advance(&mut y_m, &plan, Interval::point(times.mid()))?;
        let zt = plan.hull_at(&set.hull(), &set.center(), times);
        let v = derivative_at(set, &plan, times)?;
        let mut after = set.clone();
        self.solver.advance(&mut after, &plan, Interval::point(plan.h))?;
        Ok(CrossingData {
            y_m,
            zt,
            times: t + times,
            v,
            sign,
            after: (after, t + Interval::point(plan.h)),
        })
    }

    /// Crossing whose time spread exceeds one step. Steps are taken until
    /// the whole set is past the section; the enclosures of the steps that
    /// meet the section are hulled and the set is projected from the step
    /// boundary closest to the middle of that window.
    fn window_crossing<S: FlowSet>(
        &self,
        set: &S,
        t: Interval,
        sign: i8,
        derivative_at: &impl Fn(&S, &StepPlan, Interval) -> Result<Option<IMat>>,
    ) -> Result<CrossingData<S>> {
        let field = self.solver.field();
        let mut cur = set.clone();
        let mut tc = t;
        let mut boundaries: Vec<(S, Interval)> = Vec::new();
        let mut zt: Option<IVec> = None;
        let mut v: Option<IMat> = None;
        let mut window: Option<Interval> = None;
        for _ in 0..self.solver.config().max_steps {
            let s_now = self.section.value(&cur.hull());
            let past = if sign > 0 { s_now.lo() > 0.0 } else { s_now.hi() < 0.0 };
            if past {
                let times = window.ok_or_else(|| Error::TransversalityFailure("empty crossing window".into()))?;
                let mid = times.mid();
                let (y_m, _) = boundaries
                    .iter()
                    .filter(|(_, tb)| tb.lo() >= times.lo() && tb.hi() <= times.hi())
                    .min_by(|a, b| (a.1.mid() - mid).abs().total_cmp(&(b.1.mid() - mid).abs()))
                    .cloned()
                    .unwrap_or_else(|| boundaries[0].clone());
                return Ok(CrossingData { y_m, zt: zt.expect("window has a step"), times, v, sign, after: (cur, tc) });
            }
            let plan = self.solver.plan(&cur, tc, None)?;
            if self.section.value(&plan.enclosure).contains_zero() {
                let d = self.section.normal_component(&field.eval(tc + Interval::new(0.0, plan.h), &plan.enclosure)?);
                let ok = if sign > 0 { d.lo() > 0.0 } else { d.hi() < 0.0 };
                if !ok {
                    return Err(Error::TransversalityFailure(format!(
                        "normal velocity {d} not signed in crossing window near t = {}",
                        tc.mid()
                    )));
                }
                // Times in this step at which some trajectory can be on the
                // section.
                let s_cur = self.section.value(&cur.hull());
                let t1 = if s_cur.contains_zero() {
                    0.0
                } else {
                    Interval::point(s_cur.mig()).div(Interval::point(d.mag()))?.lo().min(plan.h)
                };
                let t2 = Interval::point(s_cur.mag()).div(Interval::point(d.mig()))?.hi().min(plan.h);
                let span = Interval::new(t1, t2);
                if window.is_none() {
                    boundaries.push((cur.clone(), tc));
                }
                let z = plan.hull_at(&cur.hull(), &cur.center(), span);
                zt = Some(zt.map_or(z.clone(), |w| w.hull(&z)));
                if let Some(dv) = derivative_at(&cur, &plan, span)? {
                    v = Some(v.map_or(dv.clone(), |w| w.hull(&dv)));
                }
                let step_times = tc + span;
                window = Some(window.map_or(step_times, |w| w.hull(step_times)));
            }
            self.solver.advance(&mut cur, &plan, Interval::point(plan.h))?;
            tc += Interval::point(plan.h);
            if window.is_some() {
                boundaries.push((cur.clone(), tc));
            }
        }
        Err(Error::MaxStepsExceeded(self.solver.config().max_steps))
    }

    fn finish<S: FlowSet>(&self, crossing: CrossingData<S>, signs: Vec<i8>) -> Result<PoincareResult> {
        let field = self.solver.field();
        let sec = &self.section;
        let n = sec.dim();
        let CrossingData { y_m, zt, times, v, .. } = crossing;
        let y_hull = y_m.hull();
        let fz = field.eval(times, &zt)?;
        let fn_ = sec.normal_component(&fz);
        let g: IVec = fz.iter().map(|&fi| fi.div(fn_)).collect::<Result<_>>()?;
        let gm = g.mid_ivec();
        let dg = &g - &gm;

        // Full-space projection L = I − Gm nᵀ and shift Gm⟨n,o⟩ − ΔG·S(Y).
        let l_full = IMat::from_fn(n, n, |i, j| {
            let id = if i == j { Interval::ONE } else { Interval::ZERO };
            id - gm[i] * sec.normal[j]
        });
        let n_o = sec.normal.dot(&sec.origin);
        let s_y = sec.value(&y_hull);
        let shift_full = &gm.scale(n_o) - &dg.scale(s_y);
        let y_doubleton = y_m.to_doubleton();
        let image_full = y_doubleton.affine_image(&l_full, &shift_full)?.hull();

        let et = sec.chart.transpose();
        let l_chart = matmul(&et, &l_full)?;
        let shift_chart = matvec(&et, &(&shift_full - &sec.origin))?;
        let image = y_doubleton.affine_image(&l_chart, &shift_chart)?;

        let dp = match v {
            Some(v) => {
                let g_full = IMat::from_fn(n, n, |i, j| {
                    let id = if i == j { Interval::ONE } else { Interval::ZERO };
                    id - g[i] * sec.normal[j]
                });
                let proj = matmul(&et, &matmul(&g_full, &v)?)?;
                Some(matmul(&proj, &sec.chart)?)
            }
            None => None,
        };
        Ok(PoincareResult { image, image_full, return_time: times, dp, crossing_signs: signs })
    }
}

/// What the image construction needs from a located crossing.
struct CrossingData<S> {
    /// The set at a time inside the crossing window.
    y_m: S,
    /// Hull of all trajectories over the crossing window.
    zt: IVec,
    /// Absolute crossing-time enclosure.
    times: Interval,
    /// `D_xφ` over the crossing window (C1 runs only).
    v: Option<IMat>,
    sign: i8,
    /// The set once it is strictly past the section, with its time.
    after: (S, Interval),
}

enum Step {
    Advance(StepPlan, f64),
    Cross(Crossing),
    /// The crossing with this sign spans several steps.
    Window(i8),
}
