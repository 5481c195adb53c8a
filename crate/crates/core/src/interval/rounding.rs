//! Directed rounding of the four basic operations and square root.
//!
//! The floating-point environment is never touched. In the default
//! [`RoundingContract::Directed`] mode each operation is performed once in
//! round-to-nearest and the exact rounding error is recovered with an
//! error-free transformation (TwoSum, or a fused multiply-add residual). The
//! result is then moved by one ulp only when the error points outward, which
//! reproduces round-down / round-up exactly. The `ulp-rounding` feature
//! switches to the [`RoundingContract::OutwardUlp`] fallback, which always
//! steps one ulp outward.

/// How lower and upper endpoints are rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingContract {
    /// Exact round-down / round-up, emulated with error-free transformations.
    Directed,
    /// Round to nearest, then step one ulp outward unconditionally.
    OutwardUlp,
}

#[cfg(not(feature = "ulp-rounding"))]
pub const ROUNDING: RoundingContract = RoundingContract::Directed;
#[cfg(feature = "ulp-rounding")]
pub const ROUNDING: RoundingContract = RoundingContract::OutwardUlp;

// Below this magnitude residuals of products and quotients may be lost to
// underflow, so the conservative one-ulp step is used instead.
const TINY: f64 = 1.0e-290;

#[inline]
fn directed() -> bool {
    matches!(ROUNDING, RoundingContract::Directed)
}

#[inline]
fn overflow_down(r: f64) -> f64 {
    // r = +inf from finite operands: the exact value is finite.
    if r == f64::INFINITY {
        f64::MAX
    } else {
        r
    }
}

#[inline]
fn overflow_up(r: f64) -> f64 {
    if r == f64::NEG_INFINITY {
        f64::MIN
    } else {
        r
    }
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

#[inline]
pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { overflow_down(s) } else { s };
    }
    if directed() {
        if two_sum_err(a, b, s) < 0.0 {
            s.next_down()
        } else {
            s
        }
    } else {
        s.next_down()
    }
}

#[inline]
pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { overflow_up(s) } else { s };
    }
    if directed() {
        if two_sum_err(a, b, s) > 0.0 {
            s.next_up()
        } else {
            s
        }
    } else {
        s.next_up()
    }
}

#[inline]
pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

#[inline]
pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() { overflow_down(p) } else { p };
    }
    if directed() && p.abs() > TINY {
        if a.mul_add(b, -p) < 0.0 {
            p.next_down()
        } else {
            p
        }
    } else {
        p.next_down()
    }
}

#[inline]
pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() { overflow_up(p) } else { p };
    }
    if directed() && p.abs() > TINY {
        if a.mul_add(b, -p) > 0.0 {
            p.next_up()
        } else {
            p
        }
    } else {
        p.next_up()
    }
}

/// Sign of (exact a/b) - q, given q = RN(a/b).
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = (-q).mul_add(b, a);
    if b > 0.0 {
        r
    } else {
        -r
    }
}

#[inline]
pub fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if a.is_finite() && b != 0.0 { overflow_down(q) } else { q };
    }
    if b.is_infinite() {
        return if q == 0.0 && (a > 0.0) != (b > 0.0) { (-0.0f64).next_down() } else { q };
    }
    if directed() && q.abs() > TINY && a.abs() > TINY {
        if div_residual_sign(a, b, q) < 0.0 {
            q.next_down()
        } else {
            q
        }
    } else {
        q.next_down()
    }
}

#[inline]
pub fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if a.is_finite() && b != 0.0 { overflow_up(q) } else { q };
    }
    if b.is_infinite() {
        return if q == 0.0 && (a > 0.0) == (b > 0.0) { 0.0f64.next_up() } else { q };
    }
    if directed() && q.abs() > TINY && a.abs() > TINY {
        if div_residual_sign(a, b, q) > 0.0 {
            q.next_up()
        } else {
            q
        }
    } else {
        q.next_up()
    }
}

#[inline]
pub fn sqrt_down(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    if directed() && a > TINY {
        if (-r).mul_add(r, a) < 0.0 {
            r.next_down()
        } else {
            r
        }
    } else {
        r.next_down().max(0.0)
    }
}

#[inline]
pub fn sqrt_up(a: f64) -> f64 {
    let r = a.sqrt();
    if !r.is_finite() {
        return r;
    }
    if r == 0.0 {
        return 0.0;
    }
    if directed() && a > TINY {
        if (-r).mul_add(r, a) > 0.0 {
            r.next_up()
        } else {
            r
        }
    } else {
        r.next_up()
    }
}

/// Steps `n` ulps down (used around libm results).
#[inline]
pub fn ulps_down(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_down())
}

#[inline]
pub fn ulps_up(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_up())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_operations_are_not_widened() {
        assert_eq!(add_down(1.0, 2.0), 3.0);
        assert_eq!(add_up(1.0, 2.0), 3.0);
        assert_eq!(mul_down(1.5, 2.0), 3.0);
        assert_eq!(div_up(1.0, 4.0), 0.25);
        assert_eq!(sqrt_down(4.0), 2.0);
        assert_eq!(sqrt_up(4.0), 2.0);
    }

    #[test]
    fn inexact_operations_bracket_the_result() {
        let (lo, hi) = (add_down(0.1, 0.2), add_up(0.1, 0.2));
        assert!(lo < hi);
        assert_eq!(hi, lo.next_up());
        let (lo, hi) = (div_down(1.0, 3.0), div_up(1.0, 3.0));
        assert_eq!(hi, lo.next_up());
        assert!(lo * 3.0 <= 1.0);
        let (lo, hi) = (sqrt_down(2.0), sqrt_up(2.0));
        assert_eq!(hi, lo.next_up());
        assert!(lo * lo <= 2.0);
    }

    #[test]
    fn negative_divisor_direction() {
        let lo = div_down(1.0, -3.0);
        let hi = div_up(1.0, -3.0);
        assert_eq!(hi, lo.next_up());
        // Rounding toward -inf of -x is the negation of rounding x toward +inf.
        assert_eq!(lo, -div_up(1.0, 3.0));
        assert_eq!(hi, -div_down(1.0, 3.0));
    }

    #[test]
    fn overflow_keeps_finite_bounds() {
        assert_eq!(add_down(f64::MAX, f64::MAX), f64::MAX);
        assert_eq!(add_up(f64::MAX, f64::MAX), f64::INFINITY);
        assert_eq!(mul_up(-f64::MAX, 2.0), f64::MIN);
        assert_eq!(mul_down(-f64::MAX, 2.0), f64::NEG_INFINITY);
    }
}
