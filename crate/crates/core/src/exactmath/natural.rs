use std::fmt;
use std::ops::{Add, Div, Mul, Rem, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MathError;

/// Arbitrary-precision non-negative integer.
///
/// Serializes as a decimal string so that values such as 2^128 survive JSON
/// untouched.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Natural(BigUint);

impl Natural {
    pub fn zero() -> Self {
        Natural(BigUint::zero())
    }

    pub fn one() -> Self {
        Natural(BigUint::one())
    }

    /// `2^exp`.
    pub fn pow2(exp: u64) -> Self {
        Natural(BigUint::one() << exp)
    }

    pub fn pow(&self, exp: u32) -> Self {
        Natural(self.0.pow(exp))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Number of significant bits; 0 for zero.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// Returns `Some(e)` when `self == 2^e`.
    pub fn exact_log2(&self) -> Option<u64> {
        if self.0.is_zero() {
            return None;
        }
        let tz = self.0.trailing_zeros()?;
        (tz + 1 == self.0.bits()).then_some(tz)
    }

    pub fn checked_sub(&self, rhs: &Natural) -> Option<Natural> {
        (self.0 >= rhs.0).then(|| Natural(&self.0 - &rhs.0))
    }

    /// Ceiling division; panics on a zero divisor like integer division does.
    pub fn div_ceil(&self, rhs: &Natural) -> Natural {
        let (q, r) = self.0.div_rem(&rhs.0);
        if r.is_zero() {
            Natural(q)
        } else {
            Natural(q + 1u32)
        }
    }

    pub fn gcd(&self, rhs: &Natural) -> Natural {
        Natural(self.0.gcd(&rhs.0))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_hex(&self) -> String {
        self.0.to_str_radix(16)
    }

    pub fn from_hex(s: &str) -> Result<Self, MathError> {
        BigUint::parse_bytes(s.as_bytes(), 16)
            .map(Natural)
            .ok_or_else(|| MathError::Parse(format!("invalid hex integer `{s}`")))
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }
}

impl From<BigUint> for Natural {
    fn from(v: BigUint) -> Self {
        Natural(v)
    }
}

macro_rules! from_prim {
    ($($t:ty),*) => {$(
        impl From<$t> for Natural {
            fn from(v: $t) -> Self {
                Natural(BigUint::from(v))
            }
        }
    )*};
}
from_prim!(u8, u16, u32, u64, u128, usize);

impl FromStr for Natural {
    type Err = MathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(MathError::Parse(format!("invalid decimal integer `{s}`")));
        }
        BigUint::from_str(s)
            .map(Natural)
            .map_err(|e| MathError::Parse(format!("invalid decimal integer `{s}`: {e}")))
    }
}

impl fmt::Display for Natural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Serialize for Natural {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Natural {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Natural> for Natural {
            type Output = Natural;
            fn $method(self, rhs: Natural) -> Natural {
                Natural($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Natural> for Natural {
            type Output = Natural;
            fn $method(self, rhs: &'a Natural) -> Natural {
                Natural($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Natural> for &Natural {
            type Output = Natural;
            fn $method(self, rhs: &'a Natural) -> Natural {
                Natural($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<u64> for Natural {
            type Output = Natural;
            fn $method(self, rhs: u64) -> Natural {
                Natural($tr::$method(self.0, rhs))
            }
        }
        impl $tr<u64> for &Natural {
            type Output = Natural;
            fn $method(self, rhs: u64) -> Natural {
                Natural($tr::$method(&self.0, rhs))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Mul, mul);
forward_binop!(Div, div);
forward_binop!(Rem, rem);
// Panics on underflow, the same contract as unsigned primitive subtraction.
forward_binop!(Sub, sub);
