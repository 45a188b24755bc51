//! Exact comparison of products between binary floats and integers.
//!
//! Thresholding rules such as `p_(i) <= i q / n` or `FDR(t) <= q` compare
//! rationals that frequently coincide. Rounding both sides independently
//! can then flip a decision, so these comparisons are carried out on the
//! exact binary values instead.

use std::cmp::Ordering;

/// Decompose a finite float into `(mantissa, exponent)` with `x = mantissa * 2^exponent`.
fn decompose(x: f64) -> (i128, i32) {
    debug_assert!(x.is_finite());
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 0 { 1 } else { -1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i128;
    if exp_bits == 0 {
        (sign * frac, -1074)
    } else {
        (sign * (frac | (1 << 52)), exp_bits - 1075)
    }
}

fn bit_len(x: i128) -> u32 {
    128 - x.unsigned_abs().leading_zeros()
}

/// Compare `a * 2^shift` against `b` where `shift >= 0`.
fn cmp_shifted(a: i128, shift: u32, b: i128) -> Ordering {
    if a == 0 {
        return 0.cmp(&b);
    }
    if bit_len(a) + shift > 126 {
        // |a * 2^shift| exceeds any |b| we can hold.
        return if a > 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        };
    }
    (a << shift).cmp(&b)
}

/// Exactly compare `a * x` with `b * y` for finite floats `a`, `b` and
/// integers `|x|, |y| < 2^64`.
pub fn cmp_products(a: f64, x: i128, b: f64, y: i128) -> Ordering {
    let (ma, ea) = decompose(a);
    let (mb, eb) = decompose(b);
    let lhs = ma * x;
    let rhs = mb * y;
    if lhs == 0 || rhs == 0 {
        return lhs.signum().cmp(&rhs.signum());
    }
    if ea >= eb {
        cmp_shifted(lhs, (ea - eb) as u32, rhs)
    } else {
        cmp_shifted(rhs, (eb - ea) as u32, lhs).reverse()
    }
}

/// `a * x <= b * y`, exactly.
pub fn le_products(a: f64, x: i128, b: f64, y: i128) -> bool {
    cmp_products(a, x, b, y) != Ordering::Greater
}

/// A significance level, tuning constant or p-value used in threshold
/// comparisons.
///
/// Such numbers are usually typed as short decimals (`0.3`), whose binary
/// value differs from the intended rational. When the shortest round-trip
/// decimal of the float has at most six fractional digits the number is
/// compared as that decimal fraction; otherwise its exact binary value is
/// used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    value: f64,
    decimal: Option<(i128, i128)>,
}

const MAX_DECIMAL_DIGITS: usize = 6;
const SMALL: u128 = 1 << 64;

fn small(x: i128) -> bool {
    x.unsigned_abs() < SMALL
}

impl Level {
    pub fn new(value: f64) -> Self {
        Level {
            value,
            decimal: decimal_fraction(value),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Compare `self * x` with `other * y`.
    pub fn cmp_with(&self, x: i128, other: &Level, y: i128) -> Ordering {
        let fallback = || cmp_products(self.value, x, other.value, y);
        let both = |a: i128, b: i128, c: i128, d: i128| match (a.checked_mul(b), c.checked_mul(d)) {
            (Some(l), Some(r)) if small(l) && small(r) => Some((l, r)),
            _ => None,
        };
        match (self.decimal, other.decimal) {
            (Some((sn, sd)), Some((on, od))) => {
                match (
                    sn.checked_mul(x).and_then(|v| v.checked_mul(od)),
                    on.checked_mul(y).and_then(|v| v.checked_mul(sd)),
                ) {
                    (Some(l), Some(r)) => l.cmp(&r),
                    _ => fallback(),
                }
            }
            (Some((sn, sd)), None) => match both(sn, x, sd, y) {
                Some((l, r)) => cmp_products(1.0, l, other.value, r),
                None => fallback(),
            },
            (None, Some((on, od))) => match both(x, od, on, y) {
                Some((l, r)) => cmp_products(self.value, l, 1.0, r),
                None => fallback(),
            },
            (None, None) => fallback(),
        }
    }

    /// Compare `a * x` with `self * y` for a float `a` taken at its exact
    /// binary value.
    pub fn cmp_scaled(&self, a: f64, x: i128, y: i128) -> Ordering {
        let exact_a = Level {
            value: a,
            decimal: None,
        };
        exact_a.cmp_with(x, self, y)
    }

    /// `a * x <= self * y`.
    pub fn le_scaled(&self, a: f64, x: i128, y: i128) -> bool {
        self.cmp_scaled(a, x, y) != Ordering::Greater
    }
}

fn decimal_fraction(v: f64) -> Option<(i128, i128)> {
    if !v.is_finite() {
        return None;
    }
    let text = format!("{v}");
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if frac.len() > MAX_DECIMAL_DIGITS || int.len() > 12 {
        return None;
    }
    let den = 10i128.pow(frac.len() as u32);
    let num = format!("{int}{frac}").parse::<i128>().ok()?;
    Some((if neg { -num } else { num }, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_integer_arithmetic() {
        assert_eq!(cmp_products(3.0, 4, 2.0, 6), Ordering::Equal);
        assert_eq!(cmp_products(0.5, 3, 1.0, 1), Ordering::Greater);
        assert_eq!(cmp_products(-1.0, 2, 1.0, -3), Ordering::Greater);
        assert_eq!(cmp_products(0.0, 5, 1.0, 0), Ordering::Equal);
        assert_eq!(cmp_products(0.0, 5, -1.0, 1), Ordering::Greater);
    }

    #[test]
    fn sees_through_decimal_rounding() {
        // f64(0.2) is slightly larger than 1/5.
        assert!(le_products(1.0, 1, 0.2, 5));
        assert_eq!(cmp_products(1.0, 1, 0.2, 5), Ordering::Less);
        // 0.1 * 3 != 0.3 in binary, but the comparison is exact.
        assert_eq!(cmp_products(0.1, 3, 0.3, 1), Ordering::Greater);
    }

    #[test]
    fn levels_compare_as_typed_decimals() {
        // f64(0.3) is below 3/10 but the level means 3/10.
        assert!(Level::new(0.3).le_scaled(1.0, 3, 10));
        assert_eq!(Level::new(0.3).cmp_scaled(1.0, 3, 10), Ordering::Equal);
        assert_eq!(Level::new(0.05).cmp_scaled(1.0, 1, 20), Ordering::Equal);
        assert_eq!(Level::new(2.5).cmp_scaled(1.0, 5, 2), Ordering::Equal);
        assert_eq!(Level::new(-0.5).cmp_scaled(1.0, -1, 2), Ordering::Equal);
        // Long expansions fall back to the binary value.
        let third = Level::new(1.0 / 3.0);
        assert_eq!(third.cmp_scaled(1.0, 1, 3), Ordering::Greater);
        assert_eq!(third.cmp_scaled(1.0 / 3.0, 1, 1), Ordering::Equal);
    }

    #[test]
    fn decimal_against_decimal() {
        let p = Level::new(0.05);
        let a = Level::new(0.05);
        assert_eq!(p.cmp_with(1, &a, 1), Ordering::Equal);
        assert_eq!(
            Level::new(0.1).cmp_with(3, &Level::new(0.3), 1),
            Ordering::Equal
        );
        assert_eq!(Level::new(0.0501).cmp_with(1, &a, 1), Ordering::Greater);
    }

    #[test]
    fn extreme_exponents() {
        assert_eq!(cmp_products(1e-300, 1, 1.0, 0), Ordering::Greater);
        assert_eq!(cmp_products(1e300, 1, 1e-300, 1 << 60), Ordering::Greater);
        assert_eq!(
            cmp_products(f64::MIN_POSITIVE / 4.0, 3, 1e-320, 1),
            Ordering::Greater
        );
    }
}
