//! Arbitrary-precision real approximations built on exact rationals.
//!
//! Every quantity the toolkit needs beyond `f64` is either rational, a square
//! root of a rational, an integer root of a rational, or a power of π. Each is
//! approximated here by a rational with a known relative error bound, so the
//! only rounding in a rendering happens when the final rational is printed.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A real number known to within relative error `2^-bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreciseReal {
    value: BigRational,
    bits: u32,
}

impl PreciseReal {
    pub(crate) fn new(value: BigRational, bits: u32) -> Self {
        PreciseReal { value, bits }
    }

    pub fn exact(value: BigRational) -> Self {
        PreciseReal { value, bits: u32::MAX }
    }

    pub fn rational(&self) -> &BigRational {
        &self.value
    }

    /// Guaranteed relative accuracy in bits (`u32::MAX` for exact values).
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }

    /// Scientific rendering with `digits` significant decimal digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        format_sig(&self.value, digits)
    }
}

impl fmt::Display for PreciseReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = if self.bits == u32::MAX {
            40
        } else {
            ((self.bits as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize
        };
        f.write_str(&self.to_decimal(digits))
    }
}

/// Exact rational serialized as a numerator/denominator pair of decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&BigRational> for RationalJson {
    fn from(q: &BigRational) -> Self {
        RationalJson {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    match q.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => v,
        _ => {
            // Out of the direct conversion range: go through a 64-bit mantissa.
            let neg = q.is_negative();
            let a = q.abs();
            let e = floor_log2(&a);
            let shift = 63 - e;
            let scaled = mul_pow2(&a, shift).to_integer();
            let m = scaled.to_f64().unwrap_or(f64::NAN);
            let v = m * 2f64.powi(-(shift as i32));
            if neg {
                -v
            } else {
                v
            }
        }
    }
}

pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// `q * 2^e` exactly.
pub fn mul_pow2(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        q * BigRational::from_integer(pow2(e as u64))
    } else {
        q / BigRational::from_integer(pow2((-e) as u64))
    }
}

/// `floor(log2 |q|)` for nonzero `q`.
pub fn floor_log2(q: &BigRational) -> i64 {
    assert!(!q.is_zero(), "log2 of zero");
    let n = q.numer().abs();
    let d = q.denom().abs();
    let mut e = n.bits() as i64 - d.bits() as i64;
    // 2^e <= |q| < 2^(e+1) after at most one correction.
    let a = BigRational::new(n, d);
    if a < mul_pow2(&BigRational::one(), e) {
        e -= 1;
    }
    e
}

/// Square root of a non-negative rational with relative error below `2^-bits`.
pub fn sqrt_rational(x: &BigRational, bits: u32) -> BigRational {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return BigRational::zero();
    }
    // Choose k so that x * 4^k has at least 2*bits + 8 integer bits.
    let lg = floor_log2(x);
    let k = ((2 * bits as i64 + 8 - lg) / 2).max(0) + 1;
    let scaled = mul_pow2(x, 2 * k).floor().to_integer();
    let (_, mag) = scaled.into_parts();
    let root = mag.sqrt();
    BigRational::new(BigInt::from_biguint(Sign::Plus, root), pow2(k as u64))
}

/// Positive `n`-th root of a positive rational with relative error below `2^-bits`.
pub fn nth_root_rational(x: &BigRational, n: u32, bits: u32) -> BigRational {
    assert!(x.is_positive(), "nth root of non-positive rational");
    assert!(n >= 1);
    let lg = floor_log2(x);
    let k = ((n as i64 * (bits as i64 + 8) - lg) / n as i64).max(0) + 1;
    let scaled = mul_pow2(x, n as i64 * k).floor().to_integer();
    let (_, mag) = scaled.into_parts();
    let root: BigUint = mag.nth_root(n);
    BigRational::new(BigInt::from_biguint(Sign::Plus, root), pow2(k as u64))
}

/// `atan(1/m)` scaled by `2^scale`, truncated.
fn atan_inv_fixed(m: u64, scale: u64) -> BigInt {
    let one = pow2(scale);
    let m_big = BigInt::from(m);
    let m2 = &m_big * &m_big;
    let mut power = &one / &m_big; // 1/m^(2j+1)
    let mut sum = power.clone();
    let mut j: u64 = 1;
    loop {
        power = &power / &m2;
        if power.is_zero() {
            break;
        }
        let term = &power / BigInt::from(2 * j + 1);
        if j % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        j += 1;
    }
    sum
}

/// π with relative error below `2^-bits` (Machin's formula in fixed point).
pub fn pi_rational(bits: u32) -> BigRational {
    let guard = 16;
    let scale = bits as u64 + guard;
    let pi = BigInt::from(16) * atan_inv_fixed(5, scale) - BigInt::from(4) * atan_inv_fixed(239, scale);
    BigRational::new(pi, pow2(scale))
}

/// Scientific rendering `d.ddd…e±x` with `digits` significant digits (truncated).
pub fn format_sig(q: &BigRational, digits: usize) -> String {
    let digits = digits.max(1);
    if q.is_zero() {
        return format!("0.{}e0", "0".repeat(digits - 1));
    }
    let neg = q.is_negative();
    let a = q.abs();
    // Decimal exponent: 10^e <= a < 10^(e+1).
    let mut e = (floor_log2(&a) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(BigInt::from(10), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-k) as usize))
        }
    };
    while a >= pow10(e + 1) {
        e += 1;
    }
    while a < pow10(e) {
        e -= 1;
    }
    let scaled = (&a / pow10(e) * pow10(digits as i64 - 1)).floor().to_integer();
    let s = scaled.to_string();
    let (head, tail) = s.split_at(1);
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(head);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    out.push('e');
    out.push_str(&e.to_string());
    out
}

/// Integer power of a rational, allowing negative exponents.
pub fn rational_powi(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

/// Decimal rendering of an exact integer-valued or small rational, e.g. `3/4`.
pub fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn pi_matches_known_digits() {
        let pi = pi_rational(200);
        assert_eq!(
            format_sig(&pi, 50),
            "3.1415926535897932384626433832795028841971693993751e0"
        );
    }

    #[test]
    fn sqrt_two_digits() {
        let s = sqrt_rational(&q(2, 1), 128);
        assert_eq!(format_sig(&s, 30), "1.41421356237309504880168872420e0");
        let tiny = sqrt_rational(&q(1, 1_000_000), 64);
        let rel = ((tiny - q(1, 1000)) * q(1000, 1)).abs();
        assert!(rational_to_f64(&rel) < 2f64.powi(-64));
    }

    #[test]
    fn nth_root_of_fifteen() {
        // 15^(1/8) = 1.403814...
        let r = nth_root_rational(&q(15, 1), 8, 128);
        let back = num_traits::pow(r, 8);
        let rel = ((back - q(15, 1)) / q(15, 1)).abs();
        assert!(rational_to_f64(&rel) < 1e-35);
    }

    #[test]
    fn floor_log2_edges() {
        assert_eq!(floor_log2(&q(1, 1)), 0);
        assert_eq!(floor_log2(&q(3, 1)), 1);
        assert_eq!(floor_log2(&q(4, 1)), 2);
        assert_eq!(floor_log2(&q(1, 3)), -2);
        assert_eq!(floor_log2(&q(1, 4)), -2);
    }

    #[test]
    fn format_negative_and_small() {
        assert_eq!(format_sig(&q(-1, 8), 3), "-1.25e-1");
        assert_eq!(format_sig(&q(100, 1), 2), "1.0e2");
        assert_eq!(format_sig(&BigRational::zero(), 3), "0.00e0");
    }

    #[test]
    fn f64_conversion_far_range() {
        let big = rational_powi(&q(10, 1), 400);
        assert!(rational_to_f64(&big).is_infinite() || rational_to_f64(&big) > 1e300);
        let small = rational_powi(&q(1, 3), 5);
        assert!((rational_to_f64(&small) - 1.0 / 243.0).abs() < 1e-18);
    }
}
