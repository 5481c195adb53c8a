//! Proof rules: interval Newton, sign-change existence, covering-relation
//! inequalities, the cone condition and saddle verdicts, all reported as
//! self-contained certificates.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{eig_bounds_2x2, matmul, solve_gauss, IMat, IVec, Spectrum2};

/// A map handed to interval Newton: an enclosure of `F(x0)` at a thin
/// argument and of `DF` over a box.
pub trait NewtonMap {
    fn value(&self, x0: &IVec) -> Result<IVec>;
    fn derivative(&self, x: &IVec) -> Result<IMat>;
}

/// Closure pair implementing [`NewtonMap`].
pub struct FnMap<V, D>(pub V, pub D);

impl<V, D> NewtonMap for FnMap<V, D>
where
    V: Fn(&IVec) -> Result<IVec>,
    D: Fn(&IVec) -> Result<IMat>,
{
    fn value(&self, x0: &IVec) -> Result<IVec> {
        (self.0)(x0)
    }

    fn derivative(&self, x: &IVec) -> Result<IMat> {
        (self.1)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonStatus {
    UniqueZero,
    Inconclusive,
    NoZero,
}

#[derive(Debug, Clone)]
pub struct NewtonVerdict {
    pub status: NewtonStatus,
    /// Value of the operator; `None` when the linear solve failed.
    pub n: Option<IVec>,
    /// The search box.
    pub x: IVec,
    pub x0: IVec,
}

impl NewtonVerdict {
    /// Enclosure of the unique zero when one was proved.
    pub fn zero(&self) -> Option<&IVec> {
        match self.status {
            NewtonStatus::UniqueZero => self.n.as_ref(),
            _ => None,
        }
    }

    /// The containment `N ⊂ int X`, one pair of checks per coordinate.
    pub fn checks(&self, label: &str) -> Vec<Check> {
        let mut out = Vec::new();
        for i in 0..self.x.len() {
            let bound = self.n.as_ref().map_or(Interval::ENTIRE, |n| n[i]);
            out.push(Check::new(format!("{label}: N[{i}] above search box"), bound, Relation::Gt, self.x[i].lo()));
            out.push(Check::new(format!("{label}: N[{i}] below search box"), bound, Relation::Lt, self.x[i].hi()));
        }
        out
    }
}

/// `N = x0 − [DF(X)]⁻¹ F(x0)` with the containment rule applied.
pub fn interval_newton(f: &impl NewtonMap, x0: &IVec, x: &IVec) -> Result<NewtonVerdict> {
    if x0.len() != x.len() {
        return Err(Error::DimensionMismatch("newton point and box".into()));
    }
    if !x0.subset(x) {
        return Err(Error::Domain("newton point must lie in the search box".into()));
    }
    let fx0 = f.value(x0)?;
    let df = f.derivative(x)?;
    let step = match solve_gauss(&df, &fx0) {
        Ok(s) => s,
        Err(Error::SingularPivot(_)) => {
            return Ok(NewtonVerdict { status: NewtonStatus::Inconclusive, n: None, x: x.clone(), x0: x0.clone() });
        }
        Err(e) => return Err(e),
    };
    let n = x0 - &step;
    let status = if n.interior_subset(x) {
        NewtonStatus::UniqueZero
    } else if n.disjoint(x) {
        NewtonStatus::NoZero
    } else {
        NewtonStatus::Inconclusive
    };
    Ok(NewtonVerdict { status, n: Some(n), x: x.clone(), x0: x0.clone() })
}

/// Interval Newton that retries an inconclusive box up to `enlargements`
/// times, each time with four times the radius around `x0`.
pub fn interval_newton_enlarging(f: &impl NewtonMap, x0: &IVec, x: &IVec, enlargements: usize) -> Result<NewtonVerdict> {
    let mut bx = x.clone();
    let mut verdict = interval_newton(f, x0, &bx)?;
    for _ in 0..enlargements {
        if verdict.status != NewtonStatus::Inconclusive {
            break;
        }
        bx = x0.iter().zip(bx.iter()).map(|(&c, &b)| c + (b - c).mul_scalar(4.0)).collect();
        verdict = match interval_newton(f, x0, &bx) {
            Ok(v) => v,
            Err(_) => break,
        };
    }
    Ok(verdict)
}

/// Iterates `X ← N(mid X, X) ∩ X`; stops early if the operator fails.
pub fn newton_iterate(f: &impl NewtonMap, x: &IVec, iterations: usize) -> Result<IVec> {
    let mut bx = x.clone();
    for _ in 0..iterations {
        let x0 = bx.mid_ivec();
        let v = interval_newton(f, &x0, &bx)?;
        match v.n {
            Some(n) => match n.intersect(&bx) {
                Ok(next) => bx = next,
                Err(_) => break,
            },
            None => break,
        }
    }
    Ok(bx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `bound.hi < threshold`
    Lt,
    /// `bound.lo > threshold`
    Gt,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Gt => ">",
        }
    }

    pub fn holds(self, bound: Interval, threshold: f64) -> bool {
        match self {
            Relation::Lt => bound.hi() < threshold,
            Relation::Gt => bound.lo() > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub description: String,
    pub bound: Interval,
    pub op: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(description: impl Into<String>, bound: Interval, op: Relation, threshold: f64) -> Check {
        let pass = op.holds(bound, threshold);
        Check { description: description.into(), bound, op, threshold, pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub claim_id: String,
    pub checks: Vec<Check>,
    pub overall: bool,
    /// Solver settings and derived inputs, in insertion order.
    pub config: Vec<(String, String)>,
    pub field_hash: String,
}

impl Certificate {
    pub fn new(claim_id: impl Into<String>) -> Certificate {
        Certificate { claim_id: claim_id.into(), checks: Vec::new(), overall: true, config: Vec::new(), field_hash: String::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.overall &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    /// Folds another certificate's checks into this one.
    pub fn absorb(&mut self, other: Certificate) {
        self.extend(other.checks);
    }

    pub fn set_config(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.config.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.config.push((key, value)),
        }
    }

    pub fn with_field_hash(mut self, hash: impl Into<String>) -> Certificate {
        self.field_hash = hash.into();
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Recomputes every pass flag from the recorded numbers and confirms
    /// that the recorded flags and `overall` agree with them.
    pub fn recheck(&self) -> bool {
        self.checks.iter().all(|c| c.pass == c.op.holds(c.bound, c.threshold)) && self.overall == self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"claim_id\": {},", json_str(&self.claim_id));
        s.push_str("  \"checks\": [");
        for (i, c) in self.checks.iter().enumerate() {
            s.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(
                s,
                "    {{\"description\": {}, \"bound\": [{}, {}], \"op\": \"{}\", \"threshold\": {}, \"pass\": {}}}",
                json_str(&c.description),
                json_num(c.bound.lo()),
                json_num(c.bound.hi()),
                c.op.symbol(),
                json_num(c.threshold),
                c.pass
            );
        }
        s.push_str(if self.checks.is_empty() { "],\n" } else { "\n  ],\n" });
        let _ = writeln!(s, "  \"overall\": {},", self.overall);
        s.push_str("  \"config\": {");
        for (i, (k, v)) in self.config.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{}: {}", json_str(k), json_str(v));
        }
        s.push_str("},\n");
        let _ = writeln!(s, "  \"field_hash\": {}", json_str(&self.field_hash));
        s.push('}');
        s
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let bad = |what: &str| Error::IntervalParse(format!("certificate field {what}"));
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::IntervalParse(e.to_string()))?;
        let num = |x: &serde_json::Value| -> Result<f64> {
            match x {
                serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| bad("number")),
                serde_json::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                serde_json::Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(bad("number")),
            }
        };
        let mut cert = Certificate::new(v["claim_id"].as_str().ok_or_else(|| bad("claim_id"))?);
        for c in v["checks"].as_array().ok_or_else(|| bad("checks"))? {
            let b = c["bound"].as_array().ok_or_else(|| bad("bound"))?;
            if b.len() != 2 {
                return Err(bad("bound"));
            }
            let op = match c["op"].as_str() {
                Some("<") => Relation::Lt,
                Some(">") => Relation::Gt,
                _ => return Err(bad("op")),
            };
            cert.checks.push(Check {
                description: c["description"].as_str().ok_or_else(|| bad("description"))?.to_string(),
                bound: Interval::try_new(num(&b[0])?, num(&b[1])?)?,
                op,
                threshold: num(&c["threshold"])?,
                pass: c["pass"].as_bool().ok_or_else(|| bad("pass"))?,
            });
        }
        cert.overall = v["overall"].as_bool().ok_or_else(|| bad("overall"))?;
        if let Some(cfg) = v["config"].as_object() {
            for (k, val) in cfg {
                cert.config.push((k.clone(), val.as_str().unwrap_or_default().to_string()));
            }
        }
        cert.field_hash = v["field_hash"].as_str().unwrap_or_default().to_string();
        Ok(cert)
    }
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

/// Strict opposite signs of `g` at the two endpoints of `y`.
pub fn sign_change_existence(claim_id: &str, g: impl Fn(Interval) -> Result<Interval>, y: Interval) -> Certificate {
    let mut cert = Certificate::new(claim_id);
    let lo = g(Interval::point(y.lo()));
    let hi = g(Interval::point(y.hi()));
    let (glo, ghi) = match (lo, hi) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            for (label, r) in [("lower", a), ("upper", b)] {
                if let Err(e) = r {
                    cert.push(Check::new(format!("g at {label} endpoint: {e}"), Interval::ENTIRE, Relation::Gt, 0.0));
                }
            }
            return cert;
        }
    };
    // Orientation is read off the lower endpoint; a wrong guess just fails.
    let (op_lo, op_hi) = if glo.hi() < 0.0 { (Relation::Lt, Relation::Gt) } else { (Relation::Gt, Relation::Lt) };
    cert.push(Check::new(format!("g({:e}) sign", y.lo()), glo, op_lo, 0.0));
    cert.push(Check::new(format!("g({:e}) opposite sign", y.hi()), ghi, op_hi, 0.0));
    cert
}

/// One exit edge of a covering relation, parametrized by an interval.
pub struct Edge<'a> {
    pub description: String,
    pub param: Interval,
    /// Coordinate of the image hull that is compared.
    pub project: usize,
    pub op: Relation,
    pub threshold: f64,
    /// Image hull of the edge piece with the given parameter range.
    pub image: Box<dyn Fn(Interval) -> Result<IVec> + Sync + 'a>,
}

/// Evaluated piece of an edge.
#[derive(Debug, Clone)]
pub struct EdgePiece {
    pub edge: usize,
    pub param: Interval,
    pub hull: Option<IVec>,
}

/// Checks every edge inequality, bisecting failing pieces up to `max_depth`
/// times starting from `initial_pieces` uniform pieces.
pub fn covering_check(claim_id: &str, edges: &[Edge], initial_pieces: usize, max_depth: usize) -> (Certificate, Vec<EdgePiece>) {
    let mut cert = Certificate::new(claim_id);
    let mut pieces = Vec::new();
    for (ei, edge) in edges.iter().enumerate() {
        let mut stack: Vec<(Interval, usize)> = edge.param.subdivide(initial_pieces.max(1)).into_iter().rev().map(|p| (p, 0)).collect();
        while let Some((param, depth)) = stack.pop() {
            let outcome = (edge.image)(param);
            let check = match &outcome {
                Ok(hull) => Check::new(format!("{} on {}", edge.description, param), hull[edge.project], edge.op, edge.threshold),
                Err(e) => Check::new(format!("{} on {}: {e}", edge.description, param), Interval::ENTIRE, edge.op, edge.threshold),
            };
            // A bound entirely on the wrong side is a genuine violation.
            let hopeless = outcome.is_ok() && match edge.op {
                Relation::Lt => check.bound.lo() >= edge.threshold,
                Relation::Gt => check.bound.hi() <= edge.threshold,
            };
            if check.pass || hopeless || depth >= max_depth {
                let mut check = check;
                if !check.pass && !hopeless {
                    check.description = format!("{} ({})", check.description, Error::DepthLimit(param.to_string()));
                }
                pieces.push(EdgePiece { edge: ei, param, hull: outcome.ok() });
                cert.push(check);
            } else {
                let (a, b) = param.split();
                stack.push((b, depth + 1));
                stack.push((a, depth + 1));
            }
        }
    }
    (cert, pieces)
}

/// `M = Aᵀ Q A − Q` with `Q = diag(λ, μ)`.
pub fn cone_matrix(a: &IMat, lambda: f64, mu: f64) -> Result<IMat> {
    let q = IMat::from_f64_rows(&[&[lambda, 0.0], &[0.0, mu]]);
    let aqa = matmul(&matmul(&a.transpose(), &q)?, a)?;
    Ok(&aqa - &q)
}

/// The two checks behind [`crate::linalg::posdef_sym_2x2`].
pub fn posdef_checks(label: &str, m: &IMat) -> [Check; 2] {
    let off = m[(0, 1)].hull(m[(1, 0)]);
    let det = m[(0, 0)] * m[(1, 1)] - off.sqr();
    [
        Check::new(format!("{label}: M11"), m[(0, 0)], Relation::Gt, 0.0),
        Check::new(format!("{label}: det M"), det, Relation::Gt, 0.0),
    ]
}

/// Positive definiteness of `DPᵀ Q DP − Q` for every piece.
pub fn cone_condition(claim_id: &str, pieces: &[IMat], lambda: f64, mu: f64) -> Result<Certificate> {
    if !(lambda > 0.0 && mu < 0.0) {
        return Err(Error::InvalidConfig("cone condition needs lambda > 0 > mu".into()));
    }
    let mut cert = Certificate::new(claim_id);
    cert.set_config("lambda", lambda);
    cert.set_config("mu", mu);
    for (i, a) in pieces.iter().enumerate() {
        let m = cone_matrix(a, lambda, mu)?;
        cert.extend(posdef_checks(&format!("piece {i}"), &m));
    }
    Ok(cert)
}

/// Real eigenvalues with `|λ₁| > 1 > |λ₂|`.
pub fn saddle_verdict(claim_id: &str, dp: &IMat) -> Result<Certificate> {
    let mut cert = Certificate::new(claim_id);
    let (p, q, r, s) = (dp[(0, 0)], dp[(0, 1)], dp[(1, 0)], dp[(1, 1)]);
    let disc = (p - s).sqr() + (q * r).mul_scalar(4.0);
    cert.push(Check::new("discriminant", disc, Relation::Gt, 0.0));
    let (big, small) = match eig_bounds_2x2(dp)? {
        Spectrum2::RealPair(big, small) => (big.abs(), small.abs()),
        _ => (Interval::ENTIRE, Interval::ENTIRE),
    };
    cert.push(Check::new("|unstable eigenvalue|", big, Relation::Gt, 1.0));
    cert.push(Check::new("|stable eigenvalue|", small, Relation::Lt, 1.0));
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::posdef_sym_2x2;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    fn scalar_map(f: impl Fn(Interval) -> Interval, df: impl Fn(Interval) -> Interval) -> impl NewtonMap {
        FnMap(
            move |x: &IVec| Ok(IVec(vec![f(x[0])])),
            move |x: &IVec| Ok(IMat::from_fn(1, 1, |_, _| df(x[0]))),
        )
    }

    #[test]
    fn newton_sqrt_two() {
        let f = scalar_map(|x| x.sqr() - Interval::point(2.0), |x| x.mul_scalar(2.0));
        let v = interval_newton(&f, &IVec::from_points(&[1.5]), &IVec(vec![iv(1.0, 2.0)])).unwrap();
        assert_eq!(v.status, NewtonStatus::UniqueZero);
        let n = v.zero().unwrap()[0];
        assert!(n.lo() <= 1.375 && n.hi() >= 1.4375 && n.lo() > 1.37 && n.hi() < 1.44, "{n}");
        assert!(n.contains(std::f64::consts::SQRT_2));
    }

    #[test]
    fn newton_identity_and_no_zero() {
        let f = scalar_map(|x| x, |_| Interval::ONE);
        let v = interval_newton(&f, &IVec::from_points(&[0.0]), &IVec(vec![iv(-1.0, 1.0)])).unwrap();
        assert_eq!(v.status, NewtonStatus::UniqueZero);
        assert_eq!(v.zero().unwrap()[0], Interval::ZERO);
        let g = scalar_map(|x| x - Interval::point(5.0), |_| Interval::ONE);
        let v = interval_newton(&g, &IVec::from_points(&[0.0]), &IVec(vec![iv(-1.0, 1.0)])).unwrap();
        assert_eq!(v.status, NewtonStatus::NoZero);
        assert!(v.zero().is_none());
    }

    #[test]
    fn singular_derivative_is_inconclusive() {
        let f = scalar_map(|x| x.sqr(), |x| x.mul_scalar(2.0));
        let v = interval_newton(&f, &IVec::from_points(&[0.0]), &IVec(vec![iv(-1.0, 1.0)])).unwrap();
        assert_eq!(v.status, NewtonStatus::Inconclusive);
        assert!(v.n.is_none());
    }

    #[test]
    fn enlarging_recovers_tight_boxes() {
        // The zero 1e-6 is outside the initial box of radius 1e-7.
        let f = scalar_map(|x| x - Interval::point(1e-6), |_| Interval::ONE);
        let x0 = IVec::from_points(&[0.0]);
        let v = interval_newton_enlarging(&f, &x0, &IVec(vec![iv(-1e-7, 1e-7)]), 3).unwrap();
        assert_eq!(v.status, NewtonStatus::NoZero);
        let g = scalar_map(|x| x - Interval::point(1e-7) + x.sqr().mul_scalar(0.1), |x| Interval::ONE + x.mul_scalar(0.2));
        let v = interval_newton_enlarging(&g, &x0, &IVec(vec![iv(-1e-7, 1e-7)]), 3).unwrap();
        assert_eq!(v.status, NewtonStatus::UniqueZero);
        assert!(v.x[0].rad() > 1e-7);
    }

    #[test]
    fn sign_change_examples() {
        let c = sign_change_existence("id", Ok, iv(-1.0, 1.0));
        assert!(c.overall && c.recheck());
        let c = sign_change_existence("sq", |y: Interval| Ok(y.sqr()), iv(-1.0, 1.0));
        assert!(!c.overall && c.recheck());
    }

    #[test]
    fn cone_condition_examples() {
        let d = IMat::from_f64_rows(&[&[2.0, 0.0], &[0.0, 0.1]]);
        let m = cone_matrix(&d, 1.0, -100.0).unwrap();
        assert!(m[(0, 0)].contains(3.0) && m[(1, 1)].contains(99.0));
        assert!(posdef_sym_2x2(&m));
        assert!(cone_condition("c", &[d], 1.0, -100.0).unwrap().overall);
        let c = cone_condition("c", &[IMat::identity(2)], 1.0, -100.0).unwrap();
        assert!(!c.overall);
        assert!(cone_condition("c", &[], -1.0, -100.0).is_err());
    }

    #[test]
    fn saddle_examples() {
        let d = IMat::from_f64_rows(&[&[2.0, 0.0], &[0.0, 0.5]]);
        assert!(saddle_verdict("s", &d).unwrap().overall);
        let rot = IMat::from_f64_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(!saddle_verdict("s", &rot).unwrap().overall);
    }

    #[test]
    fn covering_identity_map_fails() {
        let edges = vec![Edge {
            description: "pi_y P(r_M x Z) > r_N".into(),
            param: iv(0.028, 0.034),
            project: 0,
            op: Relation::Gt,
            threshold: -4.6,
            image: Box::new(|z: Interval| Ok(IVec(vec![Interval::point(-7.6), z]))),
        }];
        let (c, pieces) = covering_check("id", &edges, 1, 12);
        assert!(!c.overall);
        assert_eq!(pieces.len(), 1);
    }

    #[test]
    fn covering_bisects_until_it_passes() {
        // Overestimation shrinks with the piece width.
        let edges = vec![Edge {
            description: "y < 1".into(),
            param: iv(0.0, 1.0),
            project: 0,
            op: Relation::Lt,
            threshold: 1.0,
            image: Box::new(|s: Interval| Ok(IVec(vec![Interval::point(0.9) + Interval::symmetric(s.diam())]))),
        }];
        let (c, pieces) = covering_check("b", &edges, 1, 12);
        assert!(c.overall);
        assert!(pieces.len() >= 16);
        let straddle = vec![Edge {
            description: "y < 0".into(),
            param: iv(0.0, 1.0),
            project: 0,
            op: Relation::Lt,
            threshold: 0.0,
            image: Box::new(|_s: Interval| Ok(IVec(vec![iv(-1.0, 1.0)]))),
        }];
        let (c, pieces) = covering_check("d", &straddle, 1, 3);
        assert!(!c.overall);
        assert_eq!(pieces.len(), 8);
        assert!(c.checks[0].description.contains("depth limit"));
    }

    #[test]
    fn certificate_json_round_trip() {
        let mut c = Certificate::new("demo").with_field_hash("abc");
        c.push(Check::new("a \"quoted\" bound", iv(0.1, 0.3), Relation::Lt, 0.5));
        c.push(Check::new("open", Interval::ENTIRE, Relation::Gt, 0.0));
        c.set_config("order", 20);
        let text = c.to_json();
        let keys = ["\"claim_id\"", "\"checks\"", "\"overall\"", "\"config\"", "\"field_hash\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert!(back.recheck());
        assert!(!back.overall);
    }

    #[test]
    fn tampered_certificate_fails_recheck() {
        let mut c = Certificate::new("t");
        c.push(Check::new("x", iv(0.1, 0.3), Relation::Lt, 0.5));
        assert!(c.recheck());
        c.checks[0].bound = iv(0.1, 0.7);
        assert!(!c.recheck());
    }
}
