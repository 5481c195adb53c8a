use super::rounding::{sqrt_down, sqrt_up, ulps_down, ulps_up};
use super::Interval;
use crate::error::{Error, Result};

// libm results are trusted to within LIBM_ULPS units in the last place.
const LIBM_ULPS: u32 = 2;

fn libm_enclosure(v: f64) -> Interval {
    Interval::new(ulps_down(v, LIBM_ULPS), ulps_up(v, LIBM_ULPS))
}

/// Is there an integer `k` with `(2k + offset)·π ∈ x`? Conservative: may
/// answer `true` when the candidate point only nearly touches `x`.
fn hits_multiple_of_pi(x: Interval, offset: f64) -> bool {
    let approx_lo = (x.lo() / std::f64::consts::PI - offset) / 2.0;
    let approx_hi = (x.hi() / std::f64::consts::PI - offset) / 2.0;
    let k_lo = approx_lo.floor() as i64 - 1;
    let k_hi = approx_hi.ceil() as i64 + 1;
    (k_lo..=k_hi).any(|k| {
        let point = Interval::point(2.0 * k as f64 + offset) * Interval::PI;
        !point.disjoint(x)
    })
}

impl Interval {
    /// Square with the even-power image: `sqr([-1,1]) = [0,1]`.
    pub fn sqr(self) -> Interval {
        let m = self.mig();
        let mm = self.mag();
        let lo = if m == 0.0 { 0.0 } else { (Interval::point(m) * Interval::point(m)).lo() };
        let hi = (Interval::point(mm) * Interval::point(mm)).hi();
        Interval::new(lo.max(0.0), hi)
    }

    /// Integer power by repeated squaring, using [`Interval::sqr`] for the
    /// even steps.
    pub fn pow_int(self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => self,
            _ if n.is_multiple_of(2) => self.pow_int(n / 2).sqr(),
            _ => self * self.pow_int(n - 1),
        }
    }

    pub fn sqrt(self) -> Result<Interval> {
        if self.lo() < 0.0 {
            return Err(Error::Domain(format!("sqrt of {self}")));
        }
        Ok(Interval::new(sqrt_down(self.lo()), sqrt_up(self.hi())))
    }

    pub fn exp(self) -> Interval {
        let lo = if self.lo() == 0.0 { 1.0 } else { ulps_down(self.lo().exp(), LIBM_ULPS).max(0.0) };
        let hi = if self.hi() == 0.0 { 1.0 } else { ulps_up(self.hi().exp(), LIBM_ULPS) };
        Interval::new(lo, hi)
    }

    pub fn log(self) -> Result<Interval> {
        if self.lo() <= 0.0 {
            return Err(Error::Domain(format!("log of {self}")));
        }
        let lo = if self.lo() == 1.0 { 0.0 } else { ulps_down(self.lo().ln(), LIBM_ULPS) };
        let hi = if self.hi() == 1.0 { 0.0 } else { ulps_up(self.hi().ln(), LIBM_ULPS) };
        Ok(Interval::new(lo, hi))
    }

    pub fn sin(self) -> Interval {
        let full = Interval::new(-1.0, 1.0);
        if !self.is_finite() || self.diam() >= 2.0 * std::f64::consts::PI || self.mag() > 1.0e15 {
            return full;
        }
        if self.is_point() && self.lo() == 0.0 {
            return Interval::ZERO;
        }
        let mut r = libm_enclosure(self.lo().sin()).hull(libm_enclosure(self.hi().sin()));
        if hits_multiple_of_pi(self, 0.5) {
            r = r.hull_point(1.0);
        }
        if hits_multiple_of_pi(self, 1.5) {
            r = r.hull_point(-1.0);
        }
        Interval::new(r.lo().max(-1.0), r.hi().min(1.0))
    }

    pub fn cos(self) -> Interval {
        let full = Interval::new(-1.0, 1.0);
        if !self.is_finite() || self.diam() >= 2.0 * std::f64::consts::PI || self.mag() > 1.0e15 {
            return full;
        }
        if self.is_point() && self.lo() == 0.0 {
            return Interval::ONE;
        }
        let mut r = libm_enclosure(self.lo().cos()).hull(libm_enclosure(self.hi().cos()));
        if hits_multiple_of_pi(self, 0.0) {
            r = r.hull_point(1.0);
        }
        if hits_multiple_of_pi(self, 1.0) {
            r = r.hull_point(-1.0);
        }
        Interval::new(r.lo().max(-1.0), r.hi().min(1.0))
    }
}
