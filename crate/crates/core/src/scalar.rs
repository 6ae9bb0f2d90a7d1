//! Scalar abstraction shared by the probability and dilation layers.
//!
//! Everything that decides a verification outcome runs on [`Rational`]
//! (`BigRational`); `f64` is available as a fast path for exploration.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Field operations plus the few extras the algorithms need.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static {
    /// `true` when the value should be treated as zero by pivoting and
    /// support computations. Exact for rationals.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    /// Equality used by reports. Exact for rationals, tolerance-based for
    /// floats.
    fn same(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }

    fn ratio(num: i64, den: i64) -> Self;
}

impl Scalar for Rational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

impl Scalar for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-12
    }

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

/// Parses `"a/b"`, `"-a/b"` or an integer into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::OutOfDomain(format!("not a rational: {text:?}"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str_radix(n, 10).map_err(|_| bad())?;
    let den = BigInt::from_str_radix(d, 10).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Canonical `"a/b"` string (integers print without a denominator).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shorthand for building exact constants in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::ratio(num, den)
}

/// Converts an exact rational into any scalar.
pub fn from_rational<S: Scalar>(r: &Rational) -> S {
    // Rational -> Rational is the identity; other scalars go through f64.
    let any: &dyn std::any::Any = r;
    if let Some(same) = (any as &dyn std::any::Any).downcast_ref::<S>() {
        return same.clone();
    }
    let n: f64 = num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN);
    S::from_f64(n).expect("scalar conversion from f64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_formats() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -3 ").unwrap(), rat(-3, 1));
        assert_eq!(parse_rational("4/8").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&rat(2, 1)), "2");
    }

    #[test]
    fn float_conversion() {
        let x: f64 = from_rational(&rat(1, 4));
        assert_eq!(x, 0.25);
        let y: Rational = from_rational(&rat(1, 3));
        assert_eq!(y, rat(1, 3));
    }
}
