//! Outward-rounded interval arithmetic over binary64 endpoints.

mod decimal;
mod elementary;
pub mod rounding;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rounding::{add_down, add_up, div_down, div_up, mul_down, mul_up, sub_down, sub_up};

pub use rounding::{RoundingContract, ROUNDING};

/// A closed interval `[lo, hi]` with `lo <= hi` and no NaN endpoints.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::try_new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    /// Outward enclosure of π.
    pub const PI: Interval = Interval {
        lo: std::f64::consts::PI,
        hi: 3.141_592_653_589_793_6,
    };

    /// Panics when `lo > hi` or an endpoint is NaN; use [`Interval::try_new`]
    /// for untrusted input.
    pub fn new(lo: f64, hi: f64) -> Self {
        match Self::try_new(lo, hi) {
            Ok(i) => i,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn try_new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        let r = r.abs();
        Self::new(-r, r)
    }

    /// Outward enclosure of a decimal literal such as `"-8.38094174282987628"`.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let (lo, hi) = decimal::enclose(text).ok_or_else(|| Error::IntervalParse(text.to_string()))?;
        Ok(Interval { lo, hi })
    }

    /// Enclosure of the rational `num / den`.
    pub fn ratio(num: f64, den: f64) -> Self {
        Interval::point(num).div(Interval::point(den)).expect("nonzero denominator")
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// A representable point inside the interval.
    pub fn mid(self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        if self.lo == f64::NEG_INFINITY {
            return if self.hi == f64::INFINITY { 0.0 } else { f64::MIN };
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on `hi - lo`.
    pub fn diam(self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    /// Upper bound on the radius about [`Interval::mid`].
    pub fn rad(self) -> f64 {
        let m = self.mid();
        sub_up(self.hi, m).max(sub_up(m, self.lo))
    }

    /// Largest absolute value.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value.
    pub fn mig(self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn subset(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self ⊂ interior(other)`.
    pub fn interior_subset(self, other: Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn disjoint(self, other: Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn hull_point(self, x: f64) -> Interval {
        Interval { lo: self.lo.min(x), hi: self.hi.max(x) }
    }

    pub fn intersect(self, other: Interval) -> Result<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            return Err(Error::EmptyIntersection(self.to_string(), other.to_string()));
        }
        Ok(Interval { lo, hi })
    }

    /// Midpoint bisection; the halves share the midpoint.
    pub fn split(self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }

    /// `n` consecutive pieces whose union covers `self`.
    pub fn subdivide(self, n: usize) -> Vec<Interval> {
        assert!(n >= 1);
        let mut cuts = Vec::with_capacity(n + 1);
        cuts.push(self.lo);
        for i in 1..n {
            let t = i as f64 / n as f64;
            let c = (self.lo + t * (self.hi - self.lo)).clamp(self.lo, self.hi);
            cuts.push(c.max(*cuts.last().unwrap()));
        }
        cuts.push(self.hi);
        cuts.windows(2).map(|w| Interval { lo: w[0], hi: w[1] }).collect()
    }

    /// `self + [-r, r]` with `r >= 0`.
    pub fn inflate(self, r: f64) -> Interval {
        let r = r.abs();
        Interval { lo: sub_down(self.lo, r), hi: add_up(self.hi, r) }
    }

    /// Interval minus its midpoint, i.e. an enclosure of `{x - mid : x ∈ self}`.
    pub fn centered(self) -> (f64, Interval) {
        let m = self.mid();
        (m, Interval { lo: sub_down(self.lo, m), hi: sub_up(self.hi, m) })
    }

    pub fn abs(self) -> Interval {
        Interval { lo: self.mig(), hi: self.mag() }
    }

    /// Division; fails when `0 ∈ rhs`.
    pub fn div(self, rhs: Interval) -> Result<Interval> {
        if rhs.contains_zero() {
            return Err(Error::DivisionByZeroInterval(format!("{self} / {rhs}")));
        }
        let cands_lo = [
            div_down(self.lo, rhs.lo),
            div_down(self.lo, rhs.hi),
            div_down(self.hi, rhs.lo),
            div_down(self.hi, rhs.hi),
        ];
        let cands_hi = [
            div_up(self.lo, rhs.lo),
            div_up(self.lo, rhs.hi),
            div_up(self.hi, rhs.lo),
            div_up(self.hi, rhs.hi),
        ];
        let lo = cands_lo.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cands_hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { lo, hi })
    }

    /// Division by a nonzero integer-valued scalar, the common case in
    /// Taylor recurrences.
    pub fn div_scalar(self, d: f64) -> Interval {
        debug_assert!(d != 0.0);
        if d > 0.0 {
            Interval { lo: div_down(self.lo, d), hi: div_up(self.hi, d) }
        } else {
            Interval { lo: div_down(self.hi, d), hi: div_up(self.lo, d) }
        }
    }

    pub fn mul_scalar(self, s: f64) -> Interval {
        if s >= 0.0 {
            Interval { lo: mul_down(self.lo, s), hi: mul_up(self.hi, s) }
        } else {
            Interval { lo: mul_down(self.hi, s), hi: mul_up(self.lo, s) }
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval { lo: sub_down(self.lo, rhs.hi), hi: sub_up(self.hi, rhs.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        let (lo, hi) = if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                (mul_down(a.lo, b.lo), mul_up(a.hi, b.hi))
            } else if b.hi <= 0.0 {
                (mul_down(a.hi, b.lo), mul_up(a.lo, b.hi))
            } else {
                (mul_down(a.hi, b.lo), mul_up(a.hi, b.hi))
            }
        } else if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                (mul_down(a.lo, b.hi), mul_up(a.hi, b.lo))
            } else if b.hi <= 0.0 {
                (mul_down(a.hi, b.hi), mul_up(a.lo, b.lo))
            } else {
                (mul_down(a.lo, b.hi), mul_up(a.lo, b.lo))
            }
        } else if b.lo >= 0.0 {
            (mul_down(a.lo, b.hi), mul_up(a.hi, b.hi))
        } else if b.hi <= 0.0 {
            (mul_down(a.hi, b.lo), mul_up(a.lo, b.lo))
        } else {
            (
                mul_down(a.lo, b.hi).min(mul_down(a.hi, b.lo)),
                mul_up(a.lo, b.lo).max(mul_up(a.hi, b.hi)),
            )
        };
        Interval { lo, hi }
    }
}

impl AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.16e}, {:.16e}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// Accepts `[lo, hi]` or a bare decimal literal. Endpoints are rounded
    /// outward unless exactly representable.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::IntervalParse(s.to_string());
        match t.strip_prefix('[') {
            Some(rest) => {
                let inner = rest.strip_suffix(']').ok_or_else(bad)?;
                let (a, b) = inner.split_once(',').ok_or_else(bad)?;
                let lo = Interval::from_decimal(a).map_err(|_| bad())?;
                let hi = Interval::from_decimal(b).map_err(|_| bad())?;
                Interval::try_new(lo.lo, hi.hi)
            }
            None => Interval::from_decimal(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
        assert_eq!(iv(-1.0, 1.0) * iv(-1.0, 1.0), iv(-1.0, 1.0));
        let q = iv(1.0, 1.0).div(iv(2.0, 4.0)).unwrap();
        assert!(q.lo() <= 0.25 && q.hi() >= 0.5);
        assert!(q.diam() <= 0.25 + 4.0 * f64::EPSILON);
    }

    #[test]
    fn division_by_zero_interval_is_an_error() {
        let err = iv(1.0, 2.0).div(iv(-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::DivisionByZeroInterval(_)));
    }

    #[test]
    fn set_operations() {
        assert_eq!(iv(0.0, 1.0).hull(iv(2.0, 3.0)), iv(0.0, 3.0));
        assert_eq!(iv(0.0, 2.0).split(), (iv(0.0, 1.0), iv(1.0, 2.0)));
        assert!(iv(1.0, 2.0).contains(1.5));
        assert_eq!(iv(0.0, 2.0).mid(), 1.0);
        assert_eq!(iv(0.0, 2.0).diam(), 2.0);
        assert!(matches!(iv(0.0, 1.0).intersect(iv(2.0, 3.0)), Err(Error::EmptyIntersection(..))));
        assert_eq!(iv(0.0, 2.0).intersect(iv(1.0, 3.0)).unwrap(), iv(1.0, 2.0));
    }

    #[test]
    fn invalid_endpoints_rejected() {
        assert!(Interval::try_new(2.0, 1.0).is_err());
        assert!(Interval::try_new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn subdivide_covers() {
        let pieces = iv(-10.7, -2.7).subdivide(200);
        assert_eq!(pieces.len(), 200);
        assert_eq!(pieces[0].lo(), -10.7);
        assert_eq!(pieces[199].hi(), -2.7);
        for w in pieces.windows(2) {
            assert_eq!(w[0].hi(), w[1].lo());
        }
    }

    #[test]
    fn text_round_trip() {
        let a = Interval::from_decimal("0.1").unwrap();
        let text = a.to_string();
        let b: Interval = text.parse().unwrap();
        assert!(a.subset(b));
        assert!(b.diam() <= a.diam() * 4.0);
        let c: Interval = "[1, 2]".parse().unwrap();
        assert_eq!(c, iv(1.0, 2.0));
        assert!("[2, 1]".parse::<Interval>().is_err());
        assert!("(1,2)".parse::<Interval>().is_err());
    }

    #[test]
    fn pi_enclosure_is_tight() {
        assert_eq!(Interval::PI.hi(), std::f64::consts::PI.next_up());
    }
}
