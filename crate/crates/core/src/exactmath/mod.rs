//! Exact arithmetic substrate.
//!
//! Every bound in this crate is evaluated over [`Natural`] and [`Rational`];
//! floating point appears only at the rendering edge. Quantities like
//! `N = 2^128` and `eps = 2^-80` are far outside what `f64` represents
//! exactly, and Q* must be the exact integer maximum, not a near miss.

mod fixed;
mod natural;
mod rational;

use num_bigint::BigUint;
use thiserror::Error;

pub use fixed::{FixedDecimal, DEFAULT_PRECISION};
pub use natural::Natural;
pub use rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MathError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("quadratic constraint is unbounded: both coefficients are zero")]
    Degenerate,
    #[error("logarithm of a non-positive value")]
    Domain,
    #[error("{0}")]
    Parse(String),
}

/// Largest `r` with `r^2 <= n`.
pub fn isqrt(n: &Natural) -> Natural {
    Natural::from(n.as_biguint().sqrt())
}

/// Largest integer `Q >= 0` with `a*Q^2 + b*Q <= c`, computed exactly.
///
/// The search bracket comes from whichever of `sqrt(c/a)` and `c/b` is
/// defined (both upper-bound the root); bisection then keeps the invariant
/// `f(lo) <= c < f(hi)`, so the result is verified at `Q` and `Q + 1`.
pub fn max_q_quadratic(a: &Rational, b: &Rational, c: &Rational) -> Result<Natural, MathError> {
    if a.is_zero() && b.is_zero() {
        return Err(MathError::Degenerate);
    }
    let eval = |q: &Natural| {
        let q = Rational::from(q.clone());
        let sq = &q * &q;
        a * &sq + &(b * &q)
    };

    let mut hi: Option<Natural> = None;
    if !a.is_zero() {
        hi = Some(isqrt(&(c / a).floor()) + 1u64);
    }
    if !b.is_zero() {
        let cand = (c / b).floor() + 1u64;
        hi = Some(match hi {
            Some(h) if h <= cand => h,
            _ => cand,
        });
    }
    let mut hi = hi.expect("at least one coefficient is nonzero");
    let mut lo = Natural::zero();
    debug_assert!(&eval(&hi) > c);

    while (&hi - &lo) > Natural::one() {
        let mid = (&lo + &hi) / 2u64;
        if &eval(&mid) <= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `log2(x)` rounded to `precision` fractional digits.
///
/// The integer part comes from bit lengths. The mantissa `x / 2^e` in
/// `[1, 2)` is held as a binary fixed-point value and squared repeatedly;
/// each overflow past 2 yields one fractional bit. The mantissa carries 64
/// guard bits beyond the fractional bits requested.
pub fn log2_rational(x: &Rational, precision: u32) -> Result<FixedDecimal, MathError> {
    if x.is_zero() {
        return Err(MathError::Domain);
    }
    let p = x.numer_ref();
    let q = x.denom_ref();

    let mut exp = p.bits() as i64 - q.bits() as i64;
    let below = if exp >= 0 { *p < (q << exp as u64) } else { (p << (-exp) as u64) < *q };
    if below {
        exp -= 1;
    }

    // 10^-(precision + 3) worth of fractional bits.
    let frac_bits = ((precision as u64 + 3) * 3322).div_ceil(1000) + 1;
    let width = frac_bits + 64;

    let shift = width as i64 - exp;
    let mut m: BigUint = if shift >= 0 { (p << shift as u64) / q } else { p / (q << (-shift) as u64) };
    let two = BigUint::from(1u32) << (width + 1);

    let mut bits = BigUint::from(0u32);
    for _ in 0..frac_bits {
        m = (&m * &m) >> width;
        bits <<= 1;
        if m >= two {
            m >>= 1;
            bits |= BigUint::from(1u32);
        }
    }

    let unit = BigUint::from(1u32) << frac_bits;
    let whole = BigUint::from(exp.unsigned_abs()) * &unit;
    let (mag, negative) = if exp >= 0 { (whole + bits, false) } else { (whole - bits, true) };
    let value = Rational::new(mag.into(), unit.into())?;
    Ok(FixedDecimal::from_signed_rational(&value, negative, precision))
}
