//! Set representations carried by the integrator.
//!
//! A [`DoubletonSet`] stands for `{x + C·r0 + Q·q}` where `x` is a point,
//! `r0` is the initial-condition spread, and `Q` is a near-orthogonal frame
//! holding the accumulated local errors `q`. Advancing through a step map
//! with Jacobian enclosure `A` multiplies the linear parts instead of
//! re-boxing them, which is what keeps rotating sets from blowing up.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{inverse, matmul, matvec, near_orthogonalize, IMat, IVec};

/// What the solver needs from a set: a hull for enclosures, a center for
/// the mean-value form, and an update rule for the step map
/// `u ↦ φ(center) + A·(u − center)`.
pub trait FlowSet: Clone {
    fn dim(&self) -> usize;

    fn hull(&self) -> IVec;

    /// Point (or near-point) vector the step map is expanded about.
    fn center(&self) -> IVec;

    /// Replaces the set `S` by `{y + A·(u − center) : u ∈ S, y ∈ center_image}`.
    fn affine_advance(&mut self, a: &IMat, center_image: &IVec) -> Result<()>;

    /// Whether the set also carries a derivative enclosure.
    fn wants_c1(&self) -> bool {
        false
    }

    /// Multiplies the carried derivative by `dphi` (an enclosure of the step
    /// map's derivative over the whole set).
    fn advance_c1(&mut self, _dphi: &IMat) -> Result<()> {
        Ok(())
    }

    /// Doubleton view of the same set (possibly looser).
    fn to_doubleton(&self) -> DoubletonSet;
}

/// A point matrix together with a verified enclosure of its inverse.
#[derive(Clone, Debug, Serialize)]
struct Frame {
    m: IMat,
    inv: IMat,
}

impl Frame {
    fn identity(n: usize) -> Frame {
        Frame { m: IMat::identity(n), inv: IMat::identity(n) }
    }
}

/// Orthogonal frame for `mid(aq)` with columns taken in decreasing order of
/// their contribution `‖col_j‖·rad(q_j)`.
fn qr_frame(aq: &IMat, q: &IVec) -> Result<Frame> {
    let mid = aq.to_dmatrix();
    let n = mid.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    let weight = |j: usize| mid.column(j).norm() * q[j].rad();
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then(a.cmp(&b)));
    let permuted = DMatrix::from_fn(n, n, |i, j| mid[(i, order[j])]);
    let f = near_orthogonalize(&permuted)?;
    Ok(Frame { m: f.q, inv: f.q_inv })
}

/// Splits `s` into its midpoint and the centered remainder.
fn recenter(s: &IVec) -> (IVec, IVec) {
    s.centered()
}

/// `{x + C·r0 + Q·q}`.
#[derive(Clone, Debug, Serialize)]
pub struct DoubletonSet {
    x: IVec,
    c: IMat,
    r0: IVec,
    q_frame: Frame,
    q: IVec,
}

impl DoubletonSet {
    /// `x0 + C·r0` with `Q = I`, `q = 0` (or the centered width of `x0` when
    /// `x0` is not a point).
    pub fn from_affine(x0: &IVec, c: &IMat, r0: &IVec) -> Result<Self> {
        let n = x0.len();
        if c.rows() != n || c.cols() != r0.len() {
            return Err(Error::DimensionMismatch(format!(
                "from_affine: x0 has {n} entries, C is {}x{}, r0 has {}",
                c.rows(),
                c.cols(),
                r0.len()
            )));
        }
        let (x, q) = recenter(x0);
        Ok(DoubletonSet { x, c: c.clone(), r0: r0.clone(), q_frame: Frame::identity(n), q })
    }

    /// Box `b` written as `mid(b) + I·(b − mid(b))`.
    pub fn from_box(b: &IVec) -> Self {
        let n = b.len();
        let (x, r0) = recenter(b);
        DoubletonSet { x, c: IMat::identity(n), r0, q_frame: Frame::identity(n), q: IVec::zeros(n) }
    }

    pub fn x(&self) -> &IVec {
        &self.x
    }

    pub fn c(&self) -> &IMat {
        &self.c
    }

    pub fn r0(&self) -> &IVec {
        &self.r0
    }

    pub fn q_matrix(&self) -> &IMat {
        &self.q_frame.m
    }

    pub fn q(&self) -> &IVec {
        &self.q
    }

    /// Enclosure of `C·r0 + Q·q`, i.e. the set minus its center.
    fn spread(&self) -> Result<IVec> {
        Ok(&matvec(&self.c, &self.r0)? + &matvec(&self.q_frame.m, &self.q)?)
    }

    /// Representation-level image under a square point matrix `A`; the `Q`
    /// part is re-orthogonalized rather than boxed.
    pub fn linear_image(&self, a: &IMat) -> Result<DoubletonSet> {
        if !a.is_square() || a.cols() != self.dim() {
            return Err(Error::DimensionMismatch("linear_image needs a square conforming matrix".into()));
        }
        let mut out = self.clone();
        let ax = matvec(a, &self.x)?;
        out.affine_advance(a, &ax)?;
        Ok(out)
    }

    /// Image `{L·u + shift}` in a space of possibly different dimension. The
    /// error frame of the result is the identity.
    pub fn affine_image(&self, l: &IMat, shift: &IVec) -> Result<DoubletonSet> {
        if l.cols() != self.dim() || l.rows() != shift.len() {
            return Err(Error::DimensionMismatch("affine_image".into()));
        }
        let lc = matmul(l, &self.c)?;
        let c_new = lc.mid();
        let s = &(&matvec(l, &self.x)? + shift) + &matvec(&(&lc - &c_new), &self.r0)?;
        let (x_new, rest) = recenter(&s);
        let lq = matmul(l, &self.q_frame.m)?;
        let q_new = &matvec(&lq, &self.q)? + &rest;
        Ok(DoubletonSet { x: x_new, c: c_new, r0: self.r0.clone(), q_frame: Frame::identity(l.rows()), q: q_new })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sets serialize")
    }
}

impl FlowSet for DoubletonSet {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn hull(&self) -> IVec {
        &self.x + &self.spread().expect("conforming parts")
    }

    fn center(&self) -> IVec {
        self.x.clone()
    }

    fn affine_advance(&mut self, a: &IMat, center_image: &IVec) -> Result<()> {
        let ac = matmul(a, &self.c)?;
        let c_new = ac.mid();
        let s = center_image + &matvec(&(&ac - &c_new), &self.r0)?;
        let (x_new, rest) = recenter(&s);
        let aq = matmul(a, &self.q_frame.m)?;
        let frame = qr_frame(&aq, &self.q).unwrap_or_else(|_| self.q_frame.clone());
        let q_new = &matvec(&matmul(&frame.inv, &aq)?, &self.q)? + &matvec(&frame.inv, &rest)?;
        self.x = x_new;
        self.c = c_new;
        self.q_frame = frame;
        self.q = q_new;
        Ok(())
    }

    fn to_doubleton(&self) -> DoubletonSet {
        self.clone()
    }
}

/// `{x + C·r0 + v : v ∈ B·r ∩ Q·q}`.
#[derive(Clone, Debug, Serialize)]
pub struct TripletonSet {
    base: DoubletonSet,
    b_frame: Frame,
    r: IVec,
}

/// Frames with a condition estimate above this are reset to the identity.
const MAX_FRAME_CONDITION: f64 = 1.0e6;

impl TripletonSet {
    pub fn from_affine(x0: &IVec, c: &IMat, r0: &IVec) -> Result<Self> {
        let base = DoubletonSet::from_affine(x0, c, r0)?;
        let n = base.dim();
        let r = base.q.clone();
        Ok(TripletonSet { base, b_frame: Frame::identity(n), r })
    }

    pub fn from_parts(base: DoubletonSet, b: &IMat, r: &IVec) -> Result<Self> {
        let inv = inverse(b)?;
        Ok(TripletonSet { base, b_frame: Frame { m: b.clone(), inv }, r: r.clone() })
    }

    pub fn b_matrix(&self) -> &IMat {
        &self.b_frame.m
    }

    pub fn r(&self) -> &IVec {
        &self.r
    }

    /// Box bound on the intersection `B·r ∩ Q·q`.
    fn error_box(&self) -> IVec {
        let br = matvec(&self.b_frame.m, &self.r).expect("conforming");
        let qq = matvec(&self.base.q_frame.m, &self.base.q).expect("conforming");
        br.iter()
            .zip(qq.iter())
            .map(|(a, b)| a.intersect(*b).unwrap_or_else(|_| a.hull(*b)))
            .collect()
    }
}

fn b_frame_for(ab: &IMat) -> Frame {
    let m = ab.mid();
    match inverse(&m) {
        Ok(inv) if m.norm_inf() * inv.norm_inf() <= MAX_FRAME_CONDITION => Frame { m, inv },
        _ => Frame::identity(ab.rows()),
    }
}

impl FlowSet for TripletonSet {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn hull(&self) -> IVec {
        let cr = matvec(&self.base.c, &self.base.r0).expect("conforming");
        &(&self.base.x + &cr) + &self.error_box()
    }

    fn center(&self) -> IVec {
        self.base.x.clone()
    }

    fn affine_advance(&mut self, a: &IMat, center_image: &IVec) -> Result<()> {
        let base = &self.base;
        let ac = matmul(a, &base.c)?;
        let c_new = ac.mid();
        let s = center_image + &matvec(&(&ac - &c_new), &base.r0)?;
        let (x_new, rest) = recenter(&s);

        let aq = matmul(a, &base.q_frame.m)?;
        let q_frame = qr_frame(&aq, &base.q).unwrap_or_else(|_| base.q_frame.clone());
        let mut q_new = &matvec(&matmul(&q_frame.inv, &aq)?, &base.q)? + &matvec(&q_frame.inv, &rest)?;

        let ab = matmul(a, &self.b_frame.m)?;
        let b_frame = b_frame_for(&ab);
        let mut r_new = &matvec(&matmul(&b_frame.inv, &ab)?, &self.r)? + &matvec(&b_frame.inv, &rest)?;

        // Each frame's coordinates are also bounded by the other frame's box.
        let from_b = matvec(&matmul(&q_frame.inv, &b_frame.m)?, &r_new)?;
        let from_q = matvec(&matmul(&b_frame.inv, &q_frame.m)?, &q_new)?;
        if let Ok(tight) = q_new.intersect(&from_b) {
            q_new = tight;
        }
        if let Ok(tight) = r_new.intersect(&from_q) {
            r_new = tight;
        }

        self.base.x = x_new;
        self.base.c = c_new;
        self.base.q_frame = q_frame;
        self.base.q = q_new;
        self.b_frame = b_frame;
        self.r = r_new;
        Ok(())
    }

    fn to_doubleton(&self) -> DoubletonSet {
        self.base.clone()
    }
}

/// Plain interval box; every step re-boxes the image.
#[derive(Clone, Debug, Serialize)]
pub struct BoxSet {
    b: IVec,
}

impl BoxSet {
    pub fn new(b: IVec) -> Self {
        BoxSet { b }
    }
}

impl FlowSet for BoxSet {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn hull(&self) -> IVec {
        self.b.clone()
    }

    fn center(&self) -> IVec {
        self.b.mid_ivec()
    }

    fn affine_advance(&mut self, a: &IMat, center_image: &IVec) -> Result<()> {
        let delta = &self.b - &self.center();
        self.b = center_image + &matvec(a, &delta)?;
        Ok(())
    }

    fn to_doubleton(&self) -> DoubletonSet {
        DoubletonSet::from_box(&self.b)
    }
}

/// A doubleton for the state plus `V = V̄ + Qv·Rv` enclosing `D_x φ`.
#[derive(Clone, Debug, Serialize)]
pub struct C1DoubletonSet {
    base: DoubletonSet,
    v_mid: IMat,
    v_frame: Frame,
    v_err: IMat,
}

impl C1DoubletonSet {
    /// Starts the derivative at `v0` (typically the identity).
    pub fn new(base: DoubletonSet, v0: &IMat) -> Self {
        let n = base.dim();
        let v_mid = v0.mid();
        let v_err = v0 - &v_mid;
        C1DoubletonSet { base, v_mid, v_frame: Frame::identity(n), v_err }
    }

    pub fn from_box(b: &IVec) -> Self {
        C1DoubletonSet::new(DoubletonSet::from_box(b), &IMat::identity(b.len()))
    }

    pub fn base(&self) -> &DoubletonSet {
        &self.base
    }

    /// Enclosure of the derivative of the flow with respect to the initial
    /// condition, valid for every point of the set.
    pub fn derivative(&self) -> IMat {
        &self.v_mid + &matmul(&self.v_frame.m, &self.v_err).expect("conforming")
    }
}

impl FlowSet for C1DoubletonSet {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn hull(&self) -> IVec {
        self.base.hull()
    }

    fn center(&self) -> IVec {
        self.base.center()
    }

    fn affine_advance(&mut self, a: &IMat, center_image: &IVec) -> Result<()> {
        self.base.affine_advance(a, center_image)
    }

    fn wants_c1(&self) -> bool {
        true
    }

    fn advance_c1(&mut self, dphi: &IMat) -> Result<()> {
        let jv = matmul(dphi, &self.v_mid)?;
        let v_mid = jv.mid();
        let jq = matmul(dphi, &self.v_frame.m)?;
        let frame = near_orthogonalize(&jq.to_dmatrix())
            .map(|f| Frame { m: f.q, inv: f.q_inv })
            .unwrap_or_else(|_| self.v_frame.clone());
        let v_err = &matmul(&matmul(&frame.inv, &jq)?, &self.v_err)? + &matmul(&frame.inv, &(&jv - &v_mid))?;
        self.v_mid = v_mid;
        self.v_frame = frame;
        self.v_err = v_err;
        Ok(())
    }

    fn to_doubleton(&self) -> DoubletonSet {
        self.base.clone()
    }
}

/// Interval `[-r, r]` in every coordinate.
pub fn symmetric_box(n: usize, r: f64) -> IVec {
    IVec(vec![Interval::symmetric(r); n])
}
