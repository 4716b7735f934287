use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{MathError, Natural};

/// Exact non-negative rational kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rational(Ratio<BigUint>);

impl Rational {
    /// Builds `numer / denom`, reducing to lowest terms.
    pub fn new(numer: Natural, denom: Natural) -> Result<Self, MathError> {
        if denom.is_zero() {
            return Err(MathError::ZeroDenominator);
        }
        Ok(Rational(Ratio::new(numer.into_biguint(), denom.into_biguint())))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::one())
    }

    pub fn from_integer(n: Natural) -> Self {
        Rational(Ratio::from_integer(n.into_biguint()))
    }

    /// `2^exp` for any signed exponent.
    pub fn pow2(exp: i64) -> Self {
        let mag = BigUint::one() << exp.unsigned_abs();
        if exp >= 0 {
            Rational(Ratio::from_integer(mag))
        } else {
            Rational(Ratio::new_raw(BigUint::one(), mag))
        }
    }

    pub fn numer(&self) -> Natural {
        Natural::from(self.0.numer().clone())
    }

    pub fn denom(&self) -> Natural {
        Natural::from(self.0.denom().clone())
    }

    pub fn numer_ref(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom_ref(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self - rhs`, or `None` if the result would be negative.
    pub fn checked_sub(&self, rhs: &Rational) -> Option<Rational> {
        (self.0 >= rhs.0).then(|| Rational(&self.0 - &rhs.0))
    }

    /// `|self - rhs|` together with the sign (`true` when `self < rhs`).
    pub fn abs_diff(&self, rhs: &Rational) -> (Rational, bool) {
        if self.0 >= rhs.0 {
            (Rational(&self.0 - &rhs.0), false)
        } else {
            (Rational(&rhs.0 - &self.0), true)
        }
    }

    pub fn recip(&self) -> Result<Rational, MathError> {
        if self.is_zero() {
            return Err(MathError::ZeroDenominator);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn floor(&self) -> Natural {
        Natural::from(self.0.numer() / self.0.denom())
    }

    /// `Some(e)` when `self == 2^e` exactly.
    pub fn exact_log2(&self) -> Option<i64> {
        let n = self.numer().exact_log2()?;
        let d = self.denom().exact_log2()?;
        Some(n as i64 - d as i64)
    }

    pub fn to_f64(&self) -> f64 {
        // Shift both parts down to 60 significant bits so huge operands
        // still convert meaningfully.
        let nb = self.0.numer().bits() as i64;
        let db = self.0.denom().bits() as i64;
        let ns = (nb - 60).max(0);
        let ds = (db - 60).max(0);
        let n = (self.0.numer() >> ns as u64).to_string().parse::<f64>().unwrap_or(0.0);
        let d = (self.0.denom() >> ds as u64).to_string().parse::<f64>().unwrap_or(1.0);
        (n / d) * 2f64.powi((ns - ds) as i32)
    }

    pub fn as_ratio(&self) -> &Ratio<BigUint> {
        &self.0
    }
}

impl From<Natural> for Rational {
    fn from(n: Natural) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational(Ratio::from_integer(BigUint::from(n)))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

/// Accepts `p/q` or a bare integer `p`.
impl FromStr for Rational {
    type Err = MathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().split_once('/') {
            Some((n, d)) => Rational::new(n.parse()?, d.parse()?),
            None => Ok(Rational::from_integer(s.parse()?)),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Mul, mul);
// Division by zero panics, as with Ratio.
forward_binop!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u64, d: u64) -> Rational {
        Rational::new(n.into(), d.into()).unwrap()
    }

    #[test]
    fn reduces_to_lowest_terms() {
        let x = r(6, 8);
        assert_eq!(x.numer(), Natural::from(3u32));
        assert_eq!(x.denom(), Natural::from(4u32));
        assert_eq!(x.to_string(), "3/4");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(Rational::new(1u64.into(), 0u64.into()).is_err());
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn checked_sub_refuses_negative() {
        assert_eq!(r(1, 2).checked_sub(&r(1, 3)), Some(r(1, 6)));
        assert_eq!(r(1, 3).checked_sub(&r(1, 2)), None);
    }

    #[test]
    fn pow2_and_exact_log2() {
        assert_eq!(Rational::pow2(-80).exact_log2(), Some(-80));
        assert_eq!(Rational::pow2(7).exact_log2(), Some(7));
        assert_eq!(r(3, 4).exact_log2(), None);
        assert_eq!(Rational::pow2(-10).to_string(), "1/1024");
    }

    #[test]
    fn to_f64_handles_huge_operands() {
        let x = Rational::pow2(-80) * Rational::from(3u64);
        let expected = 3.0 * 2f64.powi(-80);
        assert!((x.to_f64() - expected).abs() / expected < 1e-15);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("5/512".parse::<Rational>().unwrap(), r(5, 512));
        assert_eq!("7".parse::<Rational>().unwrap(), r(7, 1));
    }
}
