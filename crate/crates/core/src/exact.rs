//! Exact rational scalars.
//!
//! `BigRational` already keeps values in lowest terms with a positive
//! denominator, so it is used directly. The helpers here cover the few
//! conversions the rest of the crate needs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type ExactScalar = BigRational;

pub fn int(v: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest binary64 value. Lossy and one-way.
pub fn to_f64(x: &ExactScalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational equal to a finite binary64 value.
pub fn from_f64(x: f64) -> Result<ExactScalar> {
    BigRational::from_float(x).ok_or_else(|| Error::domain(format!("{x} is not finite")))
}

/// Horner evaluation of `sum coeffs[i] * y^i`.
pub fn horner(coeffs: &[ExactScalar], y: &ExactScalar) -> ExactScalar {
    coeffs
        .iter()
        .rev()
        .fold(ExactScalar::zero(), |acc, c| acc * y + c)
}

/// Rendering as `p/q`, or `p` for integers.
pub fn display(x: &ExactScalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
