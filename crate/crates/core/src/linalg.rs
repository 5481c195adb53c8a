//! Interval vectors and matrices, verified linear solves, near-orthogonal
//! frames and 2×2 spectral bounds.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Interval vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct IVec(pub Vec<Interval>);

impl IVec {
    pub fn zeros(n: usize) -> Self {
        IVec(vec![Interval::ZERO; n])
    }

    pub fn from_points(xs: &[f64]) -> Self {
        IVec(xs.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.mid()).collect()
    }

    pub fn mid_ivec(&self) -> IVec {
        IVec(self.0.iter().map(|x| Interval::point(x.mid())).collect())
    }

    /// Splits into midpoint and the centered remainder `self - mid`.
    pub fn centered(&self) -> (IVec, IVec) {
        let (m, r): (Vec<_>, Vec<_>) = self
            .0
            .iter()
            .map(|x| {
                let (m, r) = x.centered();
                (Interval::point(m), r)
            })
            .unzip();
        (IVec(m), IVec(r))
    }

    pub fn max_diam(&self) -> f64 {
        self.0.iter().map(|x| x.diam()).fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|x| x.mag()).fold(0.0, f64::max)
    }

    pub fn hull(&self, other: &IVec) -> IVec {
        IVec(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(*b)).collect())
    }

    pub fn intersect(&self, other: &IVec) -> Result<IVec> {
        Ok(IVec(self.0.iter().zip(&other.0).map(|(a, b)| a.intersect(*b)).collect::<Result<_>>()?))
    }

    pub fn subset(&self, other: &IVec) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.subset(*b))
    }

    pub fn interior_subset(&self, other: &IVec) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.interior_subset(*b))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.0.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    pub fn disjoint(&self, other: &IVec) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a.disjoint(*b))
    }

    pub fn scale(&self, s: Interval) -> IVec {
        IVec(self.0.iter().map(|&x| x * s).collect())
    }

    pub fn dot(&self, other: &IVec) -> Interval {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn inflate(&self, r: f64) -> IVec {
        IVec(self.0.iter().map(|x| x.inflate(r)).collect())
    }
}

impl Index<usize> for IVec {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IVec {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl Add for &IVec {
    type Output = IVec;
    fn add(self, rhs: &IVec) -> IVec {
        debug_assert_eq!(self.len(), rhs.len());
        IVec(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl Sub for &IVec {
    type Output = IVec;
    fn sub(self, rhs: &IVec) -> IVec {
        debug_assert_eq!(self.len(), rhs.len());
        IVec(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

impl Neg for &IVec {
    type Output = IVec;
    fn neg(self) -> IVec {
        IVec(self.0.iter().map(|&a| -a).collect())
    }
}

impl FromIterator<Interval> for IVec {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IVec(iter.into_iter().collect())
    }
}

impl fmt::Display for IVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Row-major interval matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct IMat {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![Interval::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Interval>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(IMat { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IMat { rows: r, cols: c, data: rows.iter().flat_map(|row| row.iter().map(|&x| Interval::point(x))).collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IMat { rows, cols, data }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Interval::point(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> IVec {
        IVec(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> IVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &IVec) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn transpose(&self) -> IMat {
        IMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mid(&self) -> IMat {
        IMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| Interval::point(x.mid())).collect() }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mid())
    }

    pub fn max_diam(&self) -> f64 {
        self.data.iter().map(|x| x.diam()).fold(0.0, f64::max)
    }

    pub fn is_point(&self) -> bool {
        self.data.iter().all(|x| x.is_point())
    }

    pub fn hull(&self, other: &IMat) -> IMat {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a.hull(*b)).collect() }
    }

    pub fn subset(&self, other: &IMat) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data.iter().zip(&other.data).all(|(a, b)| a.subset(*b))
    }

    pub fn contains_point(&self, m: &DMatrix<f64>) -> bool {
        m.nrows() == self.rows
            && m.ncols() == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)].contains(m[(i, j)])))
    }

    pub fn scale(&self, s: Interval) -> IMat {
        IMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// Drops row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> IMat {
        let keep_r: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        IMat::from_fn(keep_r.len(), keep_c.len(), |a, b| self[(keep_r[a], keep_c[b])])
    }

    /// Infinity norm upper bound.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].mag()).fold(0.0, crate::interval::rounding::add_up))
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for IMat {
    type Output = Interval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &IMat {
    type Output = IMat;
    fn add(self, rhs: &IMat) -> IMat {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl Sub for &IMat {
    type Output = IMat;
    fn sub(self, rhs: &IMat) -> IMat {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl fmt::Display for IMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for IMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn matvec(a: &IMat, v: &IVec) -> Result<IVec> {
    if a.cols != v.len() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix times vector of length {}", a.rows, a.cols, v.len())));
    }
    Ok((0..a.rows).map(|i| (0..a.cols).map(|j| a[(i, j)] * v[j]).sum()).collect())
}

pub fn matmul(a: &IMat, b: &IMat) -> Result<IMat> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!("{}x{} times {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    Ok(IMat::from_fn(a.rows, b.cols, |i, j| (0..a.cols).map(|k| a[(i, k)] * b[(k, j)]).sum()))
}

/// Enclosure of the solution set of `A x = b` over all point selections.
///
/// The system is preconditioned with the inverse of `mid(A)` and then
/// eliminated in interval arithmetic with pivoting on mignitude.
pub fn solve_gauss(a: &IMat, b: &IVec) -> Result<IVec> {
    let rhs = IMat::from_fn(b.len(), 1, |i, _| b[i]);
    Ok(solve_gauss_multi(a, &rhs)?.col(0))
}

/// Column-wise [`solve_gauss`] sharing one elimination.
pub fn solve_gauss_multi(a: &IMat, b: &IMat) -> Result<IMat> {
    if !a.is_square() || a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!("solve {}x{} with rhs {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let n = a.rows;
    let precond = a.to_dmatrix().try_inverse().ok_or(Error::SingularPivot(0))?;
    if precond.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularPivot(0));
    }
    let r = IMat::from_dmatrix(&precond);
    let mut m = matmul(&r, a)?;
    let mut rhs = matmul(&r, b)?;
    let k = rhs.cols;

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[(i, col)].mig().total_cmp(&m[(j, col)].mig()))
            .unwrap_or(col);
        if m[(pivot_row, col)].contains_zero() {
            return Err(Error::SingularPivot(col));
        }
        if pivot_row != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = t;
            }
            for j in 0..k {
                let t = rhs[(col, j)];
                rhs[(col, j)] = rhs[(pivot_row, j)];
                rhs[(pivot_row, j)] = t;
            }
        }
        let p = m[(col, col)];
        for i in col + 1..n {
            let factor = m[(i, col)].div(p)?;
            m[(i, col)] = Interval::ZERO;
            for j in col + 1..n {
                let t = m[(i, j)] - factor * m[(col, j)];
                m[(i, j)] = t;
            }
            for j in 0..k {
                let t = rhs[(i, j)] - factor * rhs[(col, j)];
                rhs[(i, j)] = t;
            }
        }
    }

    let mut x = IMat::zeros(n, k);
    for c in 0..k {
        for i in (0..n).rev() {
            let mut acc = rhs[(i, c)];
            for j in i + 1..n {
                acc -= m[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = acc.div(m[(i, i)]).map_err(|_| Error::SingularPivot(i))?;
        }
    }
    Ok(x)
}

/// Verified enclosure of `A⁻¹`.
pub fn inverse(a: &IMat) -> Result<IMat> {
    solve_gauss_multi(a, &IMat::identity(a.rows))
}

/// A near-orthogonal point frame together with an interval enclosure of its
/// inverse.
#[derive(Clone, Debug)]
pub struct OrthoFrame {
    pub q: IMat,
    pub q_inv: IMat,
    /// Diagonal of the triangular factor (signs normalized to be positive).
    pub r_diag: Vec<f64>,
}

/// QR factorization of a point matrix; returns the orthogonal factor with
/// columns oriented so that `R` has a positive diagonal.
pub fn near_orthogonalize(a: &DMatrix<f64>) -> Result<OrthoFrame> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch("near_orthogonalize needs a square matrix".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::RankDeficient);
    }
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::RankDeficient);
    }
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    let mut r_diag = Vec::with_capacity(n);
    for i in 0..n {
        let d = r[(i, i)];
        if d.abs() <= 1e-13 * scale * n as f64 {
            return Err(Error::RankDeficient);
        }
        if d < 0.0 {
            for row in 0..n {
                q[(row, i)] = -q[(row, i)];
            }
        }
        r_diag.push(d.abs());
    }
    let qi = IMat::from_dmatrix(&q);
    let q_inv = inverse(&qi).map_err(|_| Error::RankDeficient)?;
    Ok(OrthoFrame { q: qi, q_inv, r_diag })
}

/// Spectral verdict for a 2×2 interval matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Spectrum2 {
    /// Two real eigenvalues, the first with the larger magnitude bound.
    RealPair(Interval, Interval),
    /// Complex conjugate pair `re ± i·im`, `im > 0`.
    ComplexPair { re: Interval, im: Interval },
    /// The discriminant enclosure contains zero.
    Indeterminate,
}

/// Eigenvalue enclosures from the interval trace and discriminant.
pub fn eig_bounds_2x2(a: &IMat) -> Result<Spectrum2> {
    if a.rows != 2 || a.cols != 2 {
        return Err(Error::DimensionMismatch("eig_bounds_2x2 needs a 2x2 matrix".into()));
    }
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let trace = p + s;
    // (p+s)^2 - 4(ps - qr) rewritten as (p-s)^2 + 4qr to avoid the dependency
    // between trace and determinant.
    let disc = (p - s).sqr() + (q * r).mul_scalar(4.0);
    if disc.lo() > 0.0 {
        let root = disc.sqrt()?;
        let l1 = (trace + root).mul_scalar(0.5);
        let l2 = (trace - root).mul_scalar(0.5);
        let (big, small) = if l1.mag() >= l2.mag() { (l1, l2) } else { (l2, l1) };
        Ok(Spectrum2::RealPair(big, small))
    } else if disc.hi() < 0.0 {
        let im = (-disc).sqrt()?.mul_scalar(0.5);
        Ok(Spectrum2::ComplexPair { re: trace.mul_scalar(0.5), im })
    } else {
        Ok(Spectrum2::Indeterminate)
    }
}

/// Sufficient check that every symmetric point selection of `m` is positive
/// definite. The off-diagonal entries are hulled into one shared interval.
pub fn posdef_sym_2x2(m: &IMat) -> bool {
    if m.rows != 2 || m.cols != 2 {
        return false;
    }
    let off = m[(0, 1)].hull(m[(1, 0)]);
    let det = m[(0, 0)] * m[(1, 1)] - off.sqr();
    m[(0, 0)].lo() > 0.0 && det.lo() > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn matvec_examples() {
        let v = IVec::from_points(&[3.0, -2.0]);
        assert_eq!(matvec(&IMat::identity(2), &v).unwrap(), v);
        let rot = IMat::from_f64_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert_eq!(matvec(&rot, &v).unwrap(), IVec::from_points(&[-2.0, -3.0]));
        let a = IMat::from_rows(&[vec![iv(-1.0, 1.0)]]).unwrap();
        assert_eq!(matvec(&a, &IVec::from_points(&[1.0])).unwrap()[0], iv(-1.0, 1.0));
        assert!(matches!(matvec(&rot, &IVec::zeros(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn solve_scalar_examples() {
        let a = IMat::from_f64_rows(&[&[2.0]]);
        let x = solve_gauss(&a, &IVec::from_points(&[4.0])).unwrap();
        assert!(x[0].contains(2.0));
        let a = IMat::from_rows(&[vec![iv(2.0, 4.0)]]).unwrap();
        let x = solve_gauss(&a, &IVec::from_points(&[1.0])).unwrap();
        assert!(x[0].lo() <= 0.25 && x[0].hi() >= 0.5);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = IMat::from_rows(&[vec![iv(-1.0, 1.0)]]).unwrap();
        assert!(matches!(solve_gauss(&a, &IVec::from_points(&[1.0])), Err(Error::SingularPivot(_))));
        let a = IMat::from_f64_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(solve_gauss(&a, &IVec::from_points(&[1.0, 1.0])), Err(Error::SingularPivot(_))));
    }

    #[test]
    fn orthogonalize_examples() {
        let f = near_orthogonalize(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(f.q, IMat::identity(3));
        let f = near_orthogonalize(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
        assert_eq!(f.q, IMat::identity(2));
        assert!(matches!(
            near_orthogonalize(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn orthogonality_defect_of_shear() {
        let f = near_orthogonalize(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        let qtq = matmul(&f.q.transpose(), &f.q).unwrap();
        let defect = &qtq - &IMat::identity(2);
        assert!(defect.norm_inf() <= 1e-12);
    }

    #[test]
    fn spectrum_examples() {
        let d = IMat::from_f64_rows(&[&[2.0, 0.0], &[0.0, 0.5]]);
        match eig_bounds_2x2(&d).unwrap() {
            Spectrum2::RealPair(a, b) => {
                assert!(a.contains(2.0) && b.contains(0.5));
            }
            other => panic!("{other:?}"),
        }
        let rot = IMat::from_f64_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        match eig_bounds_2x2(&rot).unwrap() {
            Spectrum2::ComplexPair { re, im } => {
                assert!(re.contains(0.0) && im.contains(1.0));
            }
            other => panic!("{other:?}"),
        }
        let degenerate = IMat::from_rows(&[vec![iv(1.0, 1.0), iv(-0.1, 0.1)], vec![iv(-0.1, 0.1), iv(1.0, 1.0)]]).unwrap();
        assert_eq!(eig_bounds_2x2(&degenerate).unwrap(), Spectrum2::Indeterminate);
    }

    #[test]
    fn posdef_examples() {
        let m = IMat::from_f64_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(posdef_sym_2x2(&m));
        let m = IMat::from_rows(&[vec![iv(-1.0, 1.0), Interval::ZERO], vec![Interval::ZERO, Interval::ONE]]).unwrap();
        assert!(!posdef_sym_2x2(&m));
        let m = IMat::from_rows(&[vec![iv(2.0, 2.1), iv(0.5, 0.6)], vec![iv(0.5, 0.6), iv(1.0, 1.1)]]).unwrap();
        assert!(posdef_sym_2x2(&m));
    }
}
