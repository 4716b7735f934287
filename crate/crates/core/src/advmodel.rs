//! Adversary-advantage bounds for CTR, CBC and ECBC-MAC.
//!
//! All bounds are polynomials in the file count `Q`:
//!
//! | mode     | bound                                   |
//! |----------|-----------------------------------------|
//! | CTR      | `Q l / s_min + 2 Q^2 l / N`             |
//! | CBC      | `Q l / s_min + 2 Q^2 l^2 / N`           |
//! | ECBC-MAC | `2 Q l / s_min + (Q^2 l^2 + Q^2 + 2) / D` |
//!
//! where `D` is `2N` for the model as stated or `N` for the worked-example
//! instantiation (see [`EcbcDenominator`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{log2_rational, FixedDecimal, Natural, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdvError {
    #[error("invalid security parameters: {0}")]
    InvalidParams(String),
    #[error("advantage {0} is outside [0, 1]")]
    OutOfRange(Rational),
    #[error("zero advantage: security strength is unbounded")]
    Unbounded,
    #[error("unknown mode `{0}` (expected ctr, cbc or ecbc-mac)")]
    UnknownMode(String),
    #[error("unknown ECBC-MAC denominator `{0}` (expected two_n or paper_compat_n)")]
    UnknownDenominator(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ctr,
    Cbc,
    EcbcMac,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Ctr, Mode::Cbc, Mode::EcbcMac];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ctr => "ctr",
            Mode::Cbc => "cbc",
            Mode::EcbcMac => "ecbc-mac",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = AdvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ctr" => Ok(Mode::Ctr),
            "cbc" => Ok(Mode::Cbc),
            "ecbc-mac" | "ecbc_mac" | "ecbcmac" | "ecbc" => Ok(Mode::EcbcMac),
            _ => Err(AdvError::UnknownMode(s.to_string())),
        }
    }
}

/// Denominator of the ECBC-MAC collision term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EcbcDenominator {
    /// `2N`, the bound as derived.
    #[default]
    TwoN,
    /// `N`, as used when instantiating the SM4 example.
    PaperCompatN,
}

impl EcbcDenominator {
    pub fn as_str(self) -> &'static str {
        match self {
            EcbcDenominator::TwoN => "two_n",
            EcbcDenominator::PaperCompatN => "paper_compat_n",
        }
    }
}

impl fmt::Display for EcbcDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EcbcDenominator {
    type Err = AdvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "two_n" | "2n" => Ok(EcbcDenominator::TwoN),
            "paper_compat_n" | "n" => Ok(EcbcDenominator::PaperCompatN),
            _ => Err(AdvError::UnknownDenominator(s.to_string())),
        }
    }
}

/// Full input to every bound. Constructed only through validating builders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecurityParams {
    lambda_bits: u32,
    domain_size: Natural,
    s_min: Natural,
    blocks_per_file: Natural,
    eps_max: Rational,
    ecbc_denominator: EcbcDenominator,
}

impl SecurityParams {
    /// `N = 2^lambda_bits`, `s_min = 2^s_min_bits`.
    pub fn new(
        lambda_bits: u32,
        s_min_bits: u32,
        blocks_per_file: Natural,
        eps_max: Rational,
    ) -> Result<Self, AdvError> {
        Self::with_magnitudes(lambda_bits, Natural::pow2(s_min_bits as u64), blocks_per_file, eps_max)
    }

    /// Like [`SecurityParams::new`] but takes `s_min` as a magnitude.
    pub fn with_magnitudes(
        lambda_bits: u32,
        s_min: Natural,
        blocks_per_file: Natural,
        eps_max: Rational,
    ) -> Result<Self, AdvError> {
        let p = SecurityParams {
            lambda_bits,
            domain_size: Natural::pow2(lambda_bits as u64),
            s_min,
            blocks_per_file,
            eps_max,
            ecbc_denominator: EcbcDenominator::default(),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), AdvError> {
        if self.lambda_bits == 0 {
            return Err(AdvError::InvalidParams("lambda must be at least 1 bit".into()));
        }
        if self.blocks_per_file.is_zero() {
            return Err(AdvError::InvalidParams("blocks per file must be at least 1".into()));
        }
        if self.s_min < Natural::from(2u32) {
            return Err(AdvError::InvalidParams("s_min must be at least 2".into()));
        }
        if self.eps_max.is_zero() || self.eps_max >= Rational::one() {
            return Err(AdvError::InvalidParams(format!(
                "eps_max must lie strictly between 0 and 1, got {}",
                self.eps_max
            )));
        }
        Ok(())
    }

    pub fn with_ecbc_denominator(mut self, d: EcbcDenominator) -> Self {
        self.ecbc_denominator = d;
        self
    }

    pub fn with_eps_max(mut self, eps_max: Rational) -> Result<Self, AdvError> {
        self.eps_max = eps_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_blocks_per_file(mut self, l: Natural) -> Result<Self, AdvError> {
        self.blocks_per_file = l;
        self.validate()?;
        Ok(self)
    }

    pub fn with_s_min(mut self, s_min: Natural) -> Result<Self, AdvError> {
        self.s_min = s_min;
        self.validate()?;
        Ok(self)
    }

    pub fn lambda_bits(&self) -> u32 {
        self.lambda_bits
    }

    pub fn domain_size(&self) -> &Natural {
        &self.domain_size
    }

    pub fn s_min(&self) -> &Natural {
        &self.s_min
    }

    pub fn s_min_bits(&self) -> Option<u64> {
        self.s_min.exact_log2()
    }

    pub fn blocks_per_file(&self) -> &Natural {
        &self.blocks_per_file
    }

    pub fn eps_max(&self) -> &Rational {
        &self.eps_max
    }

    /// `k` such that `eps_max == 2^k`, when it is a power of two.
    pub fn eps_max_log2(&self) -> Option<i64> {
        self.eps_max.exact_log2()
    }

    pub fn ecbc_denominator(&self) -> EcbcDenominator {
        self.ecbc_denominator
    }

    /// The ECBC-MAC collision-term denominator `D`.
    pub fn ecbc_divisor(&self) -> Natural {
        match self.ecbc_denominator {
            EcbcDenominator::TwoN => &self.domain_size * 2u64,
            EcbcDenominator::PaperCompatN => self.domain_size.clone(),
        }
    }
}

/// A probability in `[0, 1]`; `saturated` is set when the raw bound exceeded 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdvantageValue {
    value: Rational,
    saturated: bool,
}

impl AdvantageValue {
    pub fn new(value: Rational) -> Result<Self, AdvError> {
        if value > Rational::one() {
            return Err(AdvError::OutOfRange(value));
        }
        Ok(AdvantageValue { value, saturated: false })
    }

    /// Clamps to 1, flagging saturation.
    pub fn clamped(value: Rational) -> Self {
        if value > Rational::one() {
            AdvantageValue { value: Rational::one(), saturated: true }
        } else {
            AdvantageValue { value, saturated: false }
        }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn into_value(self) -> Rational {
        self.value
    }
}

/// Guessing advantage: half the distinguishing advantage.
pub fn guessing_from_distinguishing(adv: &Rational) -> Result<AdvantageValue, AdvError> {
    if adv > &Rational::one() {
        return Err(AdvError::OutOfRange(adv.clone()));
    }
    AdvantageValue::new(adv * &Rational::new(1u64.into(), 2u64.into()).expect("1/2"))
}

fn ratio(n: Natural, d: &Natural) -> Rational {
    Rational::new(n, d.clone()).expect("parameters are validated nonzero")
}

/// PRF distinguishing term `Q l / s_min`, clamped to 1.
pub fn rho_approx(params: &SecurityParams, q_blocks: &Natural) -> AdvantageValue {
    AdvantageValue::clamped(ratio(q_blocks.clone(), params.s_min()))
}

/// Unclamped bound at a possibly fractional file count (`Q*/k` is kept exact).
pub fn raw_bound(mode: Mode, params: &SecurityParams, q: &Rational) -> Rational {
    let l = Rational::from(params.blocks_per_file().clone());
    let n = Rational::from(params.domain_size().clone());
    let s = Rational::from(params.s_min().clone());
    let two = Rational::from(2u64);
    let q_sq = q * q;
    let l_sq = &l * &l;
    match mode {
        Mode::Ctr => &(q * &l) / &s + &(&(&two * &q_sq) * &l) / &n,
        Mode::Cbc => &(q * &l) / &s + &(&(&two * &q_sq) * &l_sq) / &n,
        Mode::EcbcMac => {
            let d = Rational::from(params.ecbc_divisor());
            let collision = &(&q_sq * &l_sq) + &q_sq;
            &(&two * &(q * &l)) / &s + &(collision + two) / &d
        }
    }
}

/// Upper bound on the adversary's advantage after `q_files` files under one key.
pub fn advantage_bound(mode: Mode, params: &SecurityParams, q_files: &Natural) -> AdvantageValue {
    AdvantageValue::clamped(raw_bound(mode, params, &Rational::from(q_files.clone())))
}

/// The bound written as `quadratic * Q^2 + linear * Q + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCoefficients {
    pub quadratic: Rational,
    pub linear: Rational,
    pub constant: Rational,
}

pub fn bound_coefficients(mode: Mode, params: &SecurityParams) -> BoundCoefficients {
    let l = params.blocks_per_file();
    let n = params.domain_size();
    let s = params.s_min();
    match mode {
        Mode::Ctr => BoundCoefficients {
            quadratic: ratio(l * 2u64, n),
            linear: ratio(l.clone(), s),
            constant: Rational::zero(),
        },
        Mode::Cbc => BoundCoefficients {
            quadratic: ratio(l * l * 2u64, n),
            linear: ratio(l.clone(), s),
            constant: Rational::zero(),
        },
        Mode::EcbcMac => {
            let d = params.ecbc_divisor();
            BoundCoefficients {
                quadratic: ratio(l * l + 1u64, &d),
                linear: ratio(l * 2u64, s),
                constant: ratio(Natural::from(2u32), &d),
            }
        }
    }
}

/// Worst-case strength `-log2(eps)` in bits.
pub fn security_level_bits(eps: &AdvantageValue, precision: u32) -> Result<FixedDecimal, AdvError> {
    if eps.value().is_zero() {
        return Err(AdvError::Unbounded);
    }
    let bits = log2_rational(eps.value(), precision).map_err(|_| AdvError::Unbounded)?;
    Ok(-bits)
}
