use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Exact dyadic rational `numerator / 2^exponent`.
///
/// Canonical: the numerator is odd, or the value is `0/2^0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: BigInt,
    exponent: u32,
}

impl Dyadic {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut d = Dyadic {
            numerator: numerator.into(),
            exponent,
        };
        d.canonicalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic::new(0, 0)
    }

    pub fn one() -> Self {
        Dyadic::new(1, 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent as u64) as u32;
        if shift > 0 {
            self.numerator >>= shift;
            self.exponent -= shift;
        }
    }

    // Numerator scaled to a common exponent `e >= self.exponent`.
    fn scaled(&self, e: u32) -> BigInt {
        &self.numerator << (e - self.exponent)
    }

    /// Multiplies by `2^power`.
    pub fn shl(&self, power: i64) -> Dyadic {
        if power >= 0 {
            let p = power as u32;
            if p <= self.exponent {
                Dyadic::new(self.numerator.clone(), self.exponent - p)
            } else {
                Dyadic::new(&self.numerator << (p - self.exponent), 0)
            }
        } else {
            Dyadic::new(self.numerator.clone(), self.exponent + (-power) as u32)
        }
    }

    /// `log2(self / other)` when the quotient is an exact power of two.
    pub fn log2_ratio(&self, other: &Dyadic) -> Option<i64> {
        if self.is_zero() || other.is_zero() || self.is_negative() != other.is_negative() {
            return None;
        }
        // Canonical numerators are odd (or the value is an integer power of
        // two times an odd number at exponent 0).
        let (n1, t1) = odd_part(&self.numerator);
        let (n2, t2) = odd_part(&other.numerator);
        if n1 != n2 {
            return None;
        }
        Some((t1 as i64 - self.exponent as i64) - (t2 as i64 - other.exponent as i64))
    }

    pub fn to_f64(&self) -> f64 {
        let n: f64 = num_traits::ToPrimitive::to_f64(&self.numerator).unwrap_or(f64::NAN);
        n / 2f64.powi(self.exponent as i32)
    }

    /// Parses `"a/2^e"`, `"a/b"` with `b` a power of two, or an integer.
    pub fn parse(text: &str) -> Option<Dyadic> {
        let t = text.trim();
        match t.split_once('/') {
            None => t.parse::<BigInt>().ok().map(|n| Dyadic::new(n, 0)),
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().ok()?;
                let d = d.trim();
                let e = if let Some(e) = d.strip_prefix("2^") {
                    e.parse::<u32>().ok()?
                } else {
                    let d: BigInt = d.parse().ok()?;
                    if d <= BigInt::zero() {
                        return None;
                    }
                    let (odd, tz) = odd_part(&d);
                    if !odd.is_one() {
                        return None;
                    }
                    tz as u32
                };
                Some(Dyadic::new(n, e))
            }
        }
    }
}

fn odd_part(n: &BigInt) -> (BigInt, u64) {
    let tz = n.trailing_zeros().unwrap_or(0);
    (n >> tz, tz)
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/2^{}", self.numerator, self.exponent)
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled(e).cmp(&other.scaled(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        Dyadic::new(self.scaled(e) + rhs.scaled(e), e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        Dyadic::new(self.scaled(e) - rhs.scaled(e), e)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic::new(-&self.numerator, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let d = Dyadic::new(6, 3);
        assert_eq!(d.numerator(), &BigInt::from(3));
        assert_eq!(d.exponent(), 2);
        let z = Dyadic::new(0, 9);
        assert_eq!(z.exponent(), 0);
        assert_eq!(Dyadic::new(8, 3), Dyadic::one());
    }

    #[test]
    fn arithmetic_and_order() {
        let a = Dyadic::new(1, 2);
        let b = Dyadic::new(3, 3);
        assert_eq!(&a + &b, Dyadic::new(5, 3));
        assert_eq!(&b - &a, Dyadic::new(1, 3));
        assert!(a < b);
        assert_eq!(a.shl(1), Dyadic::new(1, 1));
        assert_eq!(a.shl(-2), Dyadic::new(1, 4));
        assert_eq!(Dyadic::new(3, 0).shl(2), Dyadic::new(12, 0));
    }

    #[test]
    fn power_of_two_ratios() {
        let a = Dyadic::new(3, 4);
        assert_eq!(Dyadic::new(3, 2).log2_ratio(&a), Some(2));
        assert_eq!(a.log2_ratio(&Dyadic::new(3, 2)), Some(-2));
        assert_eq!(Dyadic::new(5, 2).log2_ratio(&a), None);
        assert_eq!(Dyadic::new(4, 0).log2_ratio(&Dyadic::new(1, 1)), Some(3));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(Dyadic::parse("3/2^5"), Some(Dyadic::new(3, 5)));
        assert_eq!(Dyadic::parse("3/8"), Some(Dyadic::new(3, 3)));
        assert_eq!(Dyadic::parse("1/3"), None);
        assert_eq!(Dyadic::new(3, 5).to_string(), "3/2^5");
        assert_eq!(Dyadic::one().to_string(), "1");
    }
}
