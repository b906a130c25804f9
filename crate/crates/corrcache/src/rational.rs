//! Exact rational arithmetic aliases and parsing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational number used for every memory size and load in the crate.
pub type Rat = BigRational;

/// Rational from a machine integer.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `num / den`. Panics on a zero denominator.
pub fn frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational quotient of two big integers. Panics on a zero denominator.
pub fn ratio(num: BigInt, den: BigInt) -> Rat {
    Rat::new(num, den)
}

/// Parses `p/q` or a bare integer with optional sign. Decimal points and
/// zero denominators are rejected, so callers never receive a rounded or
/// undefined value.
pub fn parse_rational(s: &str) -> Result<Rat, String> {
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_str
        .trim()
        .parse()
        .map_err(|_| format!("invalid numerator in {s:?}: expected an integer or p/q"))?;
    let den: BigInt = den_str
        .trim()
        .parse()
        .map_err(|_| format!("invalid denominator in {s:?}: expected an integer or p/q"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(num, den))
}

/// Canonical `p/q` text for a rational; integers render without a slash.
pub fn display(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64`, for plotting columns only.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
