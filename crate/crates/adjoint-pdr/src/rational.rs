//! Exact rational numbers and their text format.
//!
//! All probabilities, thresholds, and frame entries in this crate are
//! arbitrary-precision rationals so that solver verdicts are exact. The
//! canonical text form is `p/q` with `q > 0` and `gcd(p, q) = 1`, or just
//! `p` when the value is an integer. The parser additionally accepts
//! terminating decimals such as `0.25`, which denote exact rationals.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Signed, Zero};

/// Arbitrary-precision rational number.
pub type Rational = Ratio<BigInt>;

/// Error produced when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalParseError {
    /// The literal is not an integer, fraction, or terminating decimal.
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    /// The literal is a fraction with denominator zero.
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
}

/// Builds a rational from machine integers. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer-valued rational.
pub fn rat_int(num: i64) -> Rational {
    Ratio::from_integer(BigInt::from(num))
}

/// Parses a rational literal: an integer (`3`, `-7`), a fraction (`2/5`,
/// `-1/3`), or a terminating decimal (`0.25`, `-1.5`). Surrounding
/// whitespace is ignored.
pub fn parse_rational(input: &str) -> Result<Rational, RationalParseError> {
    let s = input.trim();
    let malformed = || RationalParseError::Malformed(input.trim().to_string());
    if s.is_empty() {
        return Err(malformed());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = parse_int(num.trim()).ok_or_else(malformed)?;
        let den: BigInt = parse_int(den.trim()).ok_or_else(malformed)?;
        if den.is_zero() {
            return Err(RationalParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        // A terminating decimal denotes an exact rational with a power-of-ten
        // denominator. Both sides of the point must be present: `.5` and `1.`
        // are rejected.
        let (sign, digits) = split_sign(int_part);
        if digits.is_empty()
            || frac_part.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let int: BigInt = digits.parse().map_err(|_| malformed())?;
        let frac: BigInt = frac_part.parse().map_err(|_| malformed())?;
        let magnitude = int * &scale + frac;
        let signed = if sign < 0 { -magnitude } else { magnitude };
        return Ok(Ratio::new(signed, scale));
    }
    let num = parse_int(s).ok_or_else(malformed)?;
    Ok(Ratio::from_integer(num))
}

/// Formats a rational in canonical form: `p/q`, or `p` when `q == 1`.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses an optionally signed decimal integer, rejecting empty digit runs
/// and any non-digit characters (so `1e3` and `0x10` fail).
fn parse_int(s: &str) -> Option<BigInt> {
    let (sign, digits) = split_sign(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let magnitude: BigInt = digits.parse().ok()?;
    Some(if sign < 0 { -magnitude } else { magnitude })
}

fn split_sign(s: &str) -> (i8, &str) {
    if let Some(rest) = s.strip_prefix('-') {
        (-1, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (1, rest)
    } else {
        (1, s)
    }
}

/// True iff `value` lies in the closed unit interval.
pub fn in_unit_interval(value: &Rational) -> bool {
    !value.is_negative() && *value <= Rational::one()
}
