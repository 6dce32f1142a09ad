//! Exact rational arithmetic helpers.
//!
//! All cake coordinates and values are arbitrary-precision rationals,
//! kept in lowest terms with a positive denominator (guaranteed by the
//! underlying representation). Files render rationals as `p/q`; the
//! parser additionally accepts a bare integer `p` as `p/1`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = BigRational;

/// Shorthand for small rational constants: `rat(1, 3)` is 1/3.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `true` when `x` lies in the unit interval.
pub fn in_unit(x: &Rational) -> bool {
    !x.is_negative() && *x <= one()
}

/// Renders a rational as `p/q`, denominator always explicit.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed rational {input:?}: expected `p/q` or a bare integer")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses `p/q` (or a bare integer `p`) into a rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let bad = || ParseRationalError {
        input: text.to_string(),
    };
    let mut parts = text.splitn(2, '/');
    let numer: BigInt = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    let denom: BigInt = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}
