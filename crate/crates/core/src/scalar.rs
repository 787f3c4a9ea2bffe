//! Numeric scalar abstraction shared by the hitting-time solver, the
//! closed-form chain formulas and the convergence bounds.
//!
//! Everything analytic in this crate is written once against [`Scalar`] and
//! instantiated either with floating point (`f64`, `f32`) or with exact
//! arbitrary-precision rationals ([`BigRational`]). The exact instantiation
//! makes worked examples bit-exact; the float one is what sweeps use.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// A field-like number type usable by the analytic modules.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance used when validating that probability rows sum to one.
    /// Zero for exact types.
    fn tolerance() -> Self;

    /// True for exact (rational) arithmetic.
    fn is_exact() -> bool;

    /// Parses a decimal literal (`0.25`, `-3`, `1e-3`) or a fraction (`1/3`).
    fn parse_literal(s: &str) -> Option<Self>;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every scalar represents small integers")
    }

    /// `num / den`. Panics if `den == 0`.
    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "ratio with zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn parse_fraction<T: Scalar>(s: &str) -> Option<T> {
    let (a, b) = s.split_once('/')?;
    let num = T::parse_literal(a.trim())?;
    let den = T::parse_literal(b.trim())?;
    if den.is_zero() {
        return None;
    }
    Some(num / den)
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }

    fn is_exact() -> bool {
        false
    }

    fn parse_literal(s: &str) -> Option<Self> {
        if s.contains('/') {
            return parse_fraction(s);
        }
        s.parse().ok()
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn is_exact() -> bool {
        false
    }

    fn parse_literal(s: &str) -> Option<Self> {
        if s.contains('/') {
            return parse_fraction(s);
        }
        s.parse().ok()
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn parse_literal(s: &str) -> Option<Self> {
        if s.contains('/') {
            return parse_fraction(s);
        }
        parse_decimal_exact(s)
    }
}

/// Exact value of a decimal literal with optional exponent.
fn parse_decimal_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}
