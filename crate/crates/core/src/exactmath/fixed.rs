use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::Rational;

pub const DEFAULT_PRECISION: u32 = 9;

/// Signed fixed-point decimal: `scaled / 10^precision`.
///
/// Values built from exact quantities are rounded to nearest, so the rendered
/// value is within half a unit in the last place of the true value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedDecimal {
    scaled: BigInt,
    precision: u32,
}

fn pow10(n: u32) -> BigUint {
    BigUint::from(10u32).pow(n)
}

/// Rounds `n / d` to nearest, ties away from zero.
fn div_round(n: &BigUint, d: &BigUint) -> BigUint {
    let (q, r) = n.div_rem(d);
    if r * 2u32 >= *d {
        q + 1u32
    } else {
        q
    }
}

impl FixedDecimal {
    pub fn zero(precision: u32) -> Self {
        FixedDecimal { scaled: BigInt::zero(), precision }
    }

    pub fn from_scaled(scaled: BigInt, precision: u32) -> Self {
        FixedDecimal { scaled, precision }
    }

    pub fn from_rational(x: &Rational, precision: u32) -> Self {
        Self::from_signed_rational(x, false, precision)
    }

    /// Rounds `±x` to `precision` fractional digits.
    pub fn from_signed_rational(x: &Rational, negative: bool, precision: u32) -> Self {
        let mag = div_round(&(x.numer_ref() * pow10(precision)), x.denom_ref());
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        FixedDecimal { scaled: BigInt::from_biguint(sign, mag), precision }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn scaled(&self) -> &BigInt {
        &self.scaled
    }

    pub fn is_negative(&self) -> bool {
        self.scaled.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.scaled.is_zero()
    }

    /// Exact value as (magnitude, is_negative).
    pub fn to_rational(&self) -> (Rational, bool) {
        let mag = self.scaled.magnitude().clone();
        let r = Rational::new(mag.into(), pow10(self.precision).into())
            .expect("power of ten is nonzero");
        (r, self.is_negative())
    }

    /// Changes the number of fractional digits, rounding when reducing.
    pub fn rescale(&self, precision: u32) -> Self {
        match precision.cmp(&self.precision) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => FixedDecimal {
                scaled: &self.scaled * BigInt::from(pow10(precision - self.precision)),
                precision,
            },
            Ordering::Less => {
                let mag = div_round(self.scaled.magnitude(), &pow10(self.precision - precision));
                FixedDecimal { scaled: BigInt::from_biguint(self.scaled.sign(), mag), precision }
            }
        }
    }

    /// Multiplies by an exact non-negative rational, rounding to `precision`.
    pub fn mul_rational(&self, factor: &Rational, precision: u32) -> Self {
        let (mag, neg) = self.to_rational();
        Self::from_signed_rational(&(mag * factor), neg, precision)
    }

    pub fn abs(&self) -> Self {
        FixedDecimal { scaled: self.scaled.abs(), precision: self.precision }
    }

    pub fn to_f64(&self) -> f64 {
        let s = self.to_string();
        s.parse().unwrap_or_else(|_| self.scaled.to_f64().unwrap_or(f64::NAN))
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let p = self.precision.max(other.precision);
        (self.rescale(p).scaled, other.rescale(p).scaled, p)
    }
}

impl fmt::Display for FixedDecimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mag = self.scaled.magnitude();
        let unit = pow10(self.precision);
        let (int, frac) = mag.div_rem(&unit);
        if self.scaled.is_negative() {
            f.write_str("-")?;
        }
        if self.precision == 0 {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac:0>width$}", frac = frac.to_string(), width = self.precision as usize)
        }
    }
}

impl Serialize for FixedDecimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl PartialOrd for FixedDecimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedDecimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl Add for &FixedDecimal {
    type Output = FixedDecimal;
    fn add(self, rhs: &FixedDecimal) -> FixedDecimal {
        let (a, b, p) = self.aligned(rhs);
        FixedDecimal { scaled: a + b, precision: p }
    }
}

impl Sub for &FixedDecimal {
    type Output = FixedDecimal;
    fn sub(self, rhs: &FixedDecimal) -> FixedDecimal {
        let (a, b, p) = self.aligned(rhs);
        FixedDecimal { scaled: a - b, precision: p }
    }
}

impl Add for FixedDecimal {
    type Output = FixedDecimal;
    fn add(self, rhs: FixedDecimal) -> FixedDecimal {
        &self + &rhs
    }
}

impl Sub for FixedDecimal {
    type Output = FixedDecimal;
    fn sub(self, rhs: FixedDecimal) -> FixedDecimal {
        &self - &rhs
    }
}

impl Neg for FixedDecimal {
    type Output = FixedDecimal;
    fn neg(self) -> FixedDecimal {
        FixedDecimal { scaled: -self.scaled, precision: self.precision }
    }
}
