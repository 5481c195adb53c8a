//! Outward conversion of decimal literals to binary64 enclosures.

/// Sign, significant digits without leading/trailing zeros, and a decimal
/// exponent such that the value is `0.d1d2d3... * 10^exp`.
#[derive(Debug, PartialEq, Eq)]
struct Normalized {
    negative: bool,
    digits: String,
    exp: i64,
}

fn normalize(text: &str) -> Option<Normalized> {
    let text = text.trim();
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let leading = all.bytes().take_while(|&c| c == b'0').count();
    let digits = all[leading..].trim_end_matches('0').to_string();
    if digits.is_empty() {
        return Some(Normalized { negative: false, digits, exp: 0 });
    }
    let exp = exponent + int_part.len() as i64 - leading as i64;
    Some(Normalized { negative, digits, exp })
}

/// Returns `(lo, hi)` with `lo <= value(text) <= hi`; the pair is a single
/// point when the literal is exactly representable.
pub(crate) fn enclose(text: &str) -> Option<(f64, f64)> {
    let literal = normalize(text)?;
    let v: f64 = text.trim().parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    // Rust prints the exact binary expansion when asked for enough digits.
    let exact = normalize(&format!("{:.800e}", v))?;
    if exact == literal {
        Some((v, v))
    } else {
        Some((v.next_down(), v.next_up()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_literals_stay_points() {
        assert_eq!(enclose("2.5"), Some((2.5, 2.5)));
        assert_eq!(enclose("-0.125"), Some((-0.125, -0.125)));
        assert_eq!(enclose("1e3"), Some((1000.0, 1000.0)));
        assert_eq!(enclose("0"), Some((0.0, 0.0)));
        assert_eq!(enclose("00.500"), Some((0.5, 0.5)));
    }

    #[test]
    fn inexact_literals_are_widened() {
        let (lo, hi) = enclose("0.1").unwrap();
        assert!(lo < 0.1 && 0.1 < hi);
        let (lo, hi) = enclose("-8.3809417428298762873487630431").unwrap();
        assert_eq!(hi, lo.next_up().next_up());
    }

    #[test]
    fn garbage_is_rejected() {
        assert_eq!(enclose("abc"), None);
        assert_eq!(enclose("."), None);
        assert_eq!(enclose("1.2.3"), None);
    }
}
