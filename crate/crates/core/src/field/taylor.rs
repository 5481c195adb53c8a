//! Taylor-mode automatic differentiation on the expression DAG.
//!
//! Coefficients are produced order by order: once `x_[0..=k]` is known every
//! node's k-th coefficient follows from its children's coefficients up to k,
//! and `x_[k+1] = f_[k] / (k+1)`. Tangent series (one per column of the
//! initial variational matrix) are carried alongside by forward mode, giving
//! `V_[k+1] = (D_x f · V)_[k] / (k+1)`.

use super::{Node, VectorField};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{IMat, IVec};

/// Normalized Taylor coefficients of the solution and, optionally, of the
/// variational matrix.
#[derive(Debug, Clone)]
pub struct Jets {
    pub x: Vec<IVec>,
    pub v: Option<Vec<IMat>>,
}

struct Tables {
    stride: usize,
    val: Vec<Interval>,
    /// Companion series: cosine for `Sin` nodes, sine for `Cos` nodes.
    aux: Vec<Interval>,
    /// Tangent series, indexed `(node * ncols + col) * stride + k`.
    tan: Vec<Interval>,
    ncols: usize,
}

impl Tables {
    #[inline]
    fn v(&self, node: usize, k: usize) -> Interval {
        self.val[node * self.stride + k]
    }

    #[inline]
    fn a(&self, node: usize, k: usize) -> Interval {
        self.aux[node * self.stride + k]
    }

    #[inline]
    fn d(&self, node: usize, col: usize, k: usize) -> Interval {
        self.tan[(node * self.ncols + col) * self.stride + k]
    }
}

/// Cauchy product coefficient `Σ_{i=0..=k} a_i b_{k-i}`.
#[inline]
fn cauchy(k: usize, a: impl Fn(usize) -> Interval, b: impl Fn(usize) -> Interval) -> Interval {
    (0..=k).map(|i| a(i) * b(k - i)).sum()
}

fn sqr_coeff(k: usize, a: impl Fn(usize) -> Interval) -> Interval {
    let half: Interval = (0..k.div_ceil(2)).map(|i| a(i) * a(k - i)).sum();
    let doubled = half.mul_scalar(2.0);
    if k.is_multiple_of(2) {
        doubled + a(k / 2).sqr()
    } else {
        doubled
    }
}

pub(super) fn evaluate(f: &VectorField, t0: Interval, x0: &IVec, p: usize, v0: Option<&IMat>) -> Result<Jets> {
    let n = f.dim();
    let nodes = &f.nodes;
    let stride = p + 1;
    let ncols = v0.map_or(0, |m| m.cols());
    let mut tb = Tables {
        stride,
        val: vec![Interval::ZERO; nodes.len() * stride],
        aux: vec![Interval::ZERO; nodes.len() * stride],
        tan: vec![Interval::ZERO; nodes.len() * ncols * stride],
        ncols,
    };
    let mut xs: Vec<IVec> = Vec::with_capacity(stride);
    xs.push(x0.clone());
    let mut vs: Option<Vec<IMat>> = v0.map(|m| vec![m.clone()]);

    for k in 0..p {
        for (id, node) in nodes.iter().enumerate() {
            let value = node_value(&tb, node, id, k, t0, &xs, f)?;
            tb.val[id * stride + k] = value.0;
            if let Some(aux) = value.1 {
                tb.aux[id * stride + k] = aux;
            }
            for col in 0..ncols {
                let d = node_tangent(&tb, node, id, col, k, vs.as_ref().unwrap())?;
                tb.tan[(id * ncols + col) * stride + k] = d;
            }
        }
        let scale = (k + 1) as f64;
        xs.push(f.outputs.iter().map(|&o| tb.v(o, k).div_scalar(scale)).collect());
        if let Some(vs) = vs.as_mut() {
            let next = IMat::from_fn(n, ncols, |i, col| tb.d(f.outputs[i], col, k).div_scalar(scale));
            vs.push(next);
        }
    }
    Ok(Jets { x: xs, v: vs })
}

/// k-th coefficient of a node, plus the companion coefficient for sin/cos.
fn node_value(tb: &Tables, node: &Node, id: usize, k: usize, t0: Interval, xs: &[IVec], f: &VectorField) -> Result<(Interval, Option<Interval>)> {
    let zero = Interval::ZERO;
    let v = |i: usize| move |j: usize| tb.v(i, j);
    Ok(match *node {
        Node::Const { value, .. } => (if k == 0 { value } else { zero }, None),
        Node::Param(i) => (if k == 0 { f.params[i] } else { zero }, None),
        Node::Time => (
            match k {
                0 => t0,
                1 => Interval::ONE,
                _ => zero,
            },
            None,
        ),
        Node::Var(i) => (xs[k][i], None),
        Node::Neg(a) => (-tb.v(a, k), None),
        Node::Add(a, b) => (tb.v(a, k) + tb.v(b, k), None),
        Node::Sub(a, b) => (tb.v(a, k) - tb.v(b, k), None),
        Node::Mul(a, b) => (cauchy(k, v(a), v(b)), None),
        Node::Sqr(a) => (sqr_coeff(k, v(a)), None),
        Node::Div(a, b) => {
            let b0 = tb.v(b, 0);
            if b0.contains_zero() {
                return Err(Error::DivisionByZeroInterval(format!("denominator enclosure {b0}")));
            }
            let acc: Interval = (1..=k).map(|i| tb.v(b, i) * tb.v(id, k - i)).sum();
            ((tb.v(a, k) - acc).div(b0)?, None)
        }
        Node::Exp(a) => {
            if k == 0 {
                (tb.v(a, 0).exp(), None)
            } else {
                let s: Interval = (1..=k).map(|i| tb.v(a, i).mul_scalar(i as f64) * tb.v(id, k - i)).sum();
                (s.div_scalar(k as f64), None)
            }
        }
        Node::Sin(a) | Node::Cos(a) => {
            let (s, c) = if k == 0 {
                (tb.v(a, 0).sin(), tb.v(a, 0).cos())
            } else {
                let is_sin = matches!(node, Node::Sin(_));
                let sin_series = |j: usize| if is_sin { tb.v(id, j) } else { tb.a(id, j) };
                let cos_series = |j: usize| if is_sin { tb.a(id, j) } else { tb.v(id, j) };
                let ds: Interval = (1..=k).map(|i| tb.v(a, i).mul_scalar(i as f64) * cos_series(k - i)).sum();
                let dc: Interval = (1..=k).map(|i| tb.v(a, i).mul_scalar(i as f64) * sin_series(k - i)).sum();
                (ds.div_scalar(k as f64), -dc.div_scalar(k as f64))
            };
            match node {
                Node::Sin(_) => (s, Some(c)),
                _ => (c, Some(s)),
            }
        }
        Node::Sqrt(a) => {
            if k == 0 {
                (tb.v(a, 0).sqrt()?, None)
            } else {
                let r0 = tb.v(id, 0);
                if r0.contains_zero() {
                    return Err(Error::Domain(format!("sqrt series at {r0}")));
                }
                let acc: Interval = (1..k).map(|i| tb.v(id, i) * tb.v(id, k - i)).sum();
                ((tb.v(a, k) - acc).div(r0.mul_scalar(2.0))?, None)
            }
        }
    })
}

fn node_tangent(tb: &Tables, node: &Node, id: usize, col: usize, k: usize, vs: &[IMat]) -> Result<Interval> {
    let zero = Interval::ZERO;
    let v = |i: usize| move |j: usize| tb.v(i, j);
    let d = |i: usize| move |j: usize| tb.d(i, col, j);
    Ok(match *node {
        Node::Const { .. } | Node::Param(_) | Node::Time => zero,
        Node::Var(i) => vs[k][(i, col)],
        Node::Neg(a) => -tb.d(a, col, k),
        Node::Add(a, b) => tb.d(a, col, k) + tb.d(b, col, k),
        Node::Sub(a, b) => tb.d(a, col, k) - tb.d(b, col, k),
        Node::Mul(a, b) => cauchy(k, d(a), v(b)) + cauchy(k, v(a), d(b)),
        Node::Sqr(a) => cauchy(k, v(a), d(a)).mul_scalar(2.0),
        Node::Div(a, b) => {
            // b·dq = da − q·db
            let rhs = tb.d(a, col, k) - cauchy(k, v(id), d(b));
            let acc: Interval = (1..=k).map(|i| tb.v(b, i) * tb.d(id, col, k - i)).sum();
            (rhs - acc).div(tb.v(b, 0))?
        }
        Node::Exp(a) => cauchy(k, v(id), d(a)),
        Node::Sin(a) => cauchy(k, |j| tb.a(id, j), d(a)),
        Node::Cos(a) => -cauchy(k, |j| tb.a(id, j), d(a)),
        Node::Sqrt(a) => {
            // 2 r·dr = da
            let acc: Interval = (1..=k).map(|i| tb.v(id, i) * tb.d(id, col, k - i)).sum();
            (tb.d(a, col, k) - acc.mul_scalar(2.0)).div(tb.v(id, 0).mul_scalar(2.0))?
        }
    })
}
