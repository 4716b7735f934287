//! Key-rotation interval solver and rotation-benefit accounting.

use serde::Serialize;
use thiserror::Error;

use crate::advmodel::{
    bound_coefficients, raw_bound, security_level_bits, AdvError, AdvantageValue, Mode,
    SecurityParams,
};
use crate::exactmath::{
    log2_rational, max_q_quadratic, FixedDecimal, MathError, Natural, Rational, DEFAULT_PRECISION,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error(transparent)]
    Adv(#[from] AdvError),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("target eps_max = {eps_max} is infeasible for {mode}: {reason}")]
    Infeasible { mode: Mode, eps_max: Rational, reason: String },
    #[error("file size must be positive")]
    ZeroFileSize,
    #[error("block size must be a positive multiple of 8 bits, got {0}")]
    BadBlockBits(u64),
    #[error("a {file_size_bytes}-byte file needs {needed} blocks but the plan allows {allowed}")]
    FileExceedsBlocks { file_size_bytes: Natural, needed: Natural, allowed: Natural },
    #[error("rotation count k must be at least 1")]
    ZeroK,
    #[error("rotation count k = {k} exceeds Q* = {q_star}")]
    KExceedsQStar { k: Natural, q_star: Natural },
    #[error("key cost must be positive")]
    NonPositiveCost,
    #[error("sweep row k = {k}: {source}")]
    SweepRow { k: Natural, source: Box<PlanError> },
}

/// `l = ceil(file_size * 8 / block_bits)`.
pub fn blocks_per_file(file_size_bytes: &Natural, block_bits: u64) -> Result<Natural, PlanError> {
    if file_size_bytes.is_zero() {
        return Err(PlanError::ZeroFileSize);
    }
    if block_bits == 0 || block_bits % 8 != 0 {
        return Err(PlanError::BadBlockBits(block_bits));
    }
    Ok((file_size_bytes * 8u64).div_ceil(&Natural::from(block_bits)))
}

/// Total bytes encrypted under one key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DataVolume {
    pub bytes: Natural,
}

impl DataVolume {
    pub fn kib(&self) -> Rational {
        Rational::new(self.bytes.clone(), 1024u64.into()).expect("nonzero")
    }

    pub fn mib(&self) -> Rational {
        Rational::new(self.bytes.clone(), (1u64 << 20).into()).expect("nonzero")
    }

    pub fn kib_decimal(&self, precision: u32) -> FixedDecimal {
        FixedDecimal::from_rational(&self.kib(), precision)
    }

    pub fn mib_decimal(&self, precision: u32) -> FixedDecimal {
        FixedDecimal::from_rational(&self.mib(), precision)
    }
}

pub fn data_volume(q_star: &Natural, file_size_bytes: &Natural) -> DataVolume {
    DataVolume { bytes: q_star * file_size_bytes }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationPlan {
    pub mode: Mode,
    pub params: SecurityParams,
    pub q_star: Natural,
    pub eps_at_q_star: Rational,
    pub worst_case_bits: FixedDecimal,
    pub file_size_bytes: Natural,
    pub max_data_volume_bytes: Natural,
}

impl RotationPlan {
    pub fn data_volume(&self) -> DataVolume {
        DataVolume { bytes: self.max_data_volume_bytes.clone() }
    }
}

fn file_blocks_bits(file_size_bytes: &Natural, block_bits: u32) -> Natural {
    (file_size_bytes * 8u64).div_ceil(&Natural::from(block_bits as u64))
}

/// Largest `Q` whose advantage bound stays within `eps_max`.
pub fn compute_q_star(
    mode: Mode,
    params: &SecurityParams,
    file_size_bytes: &Natural,
) -> Result<RotationPlan, PlanError> {
    if file_size_bytes.is_zero() {
        return Err(PlanError::ZeroFileSize);
    }
    let needed = file_blocks_bits(file_size_bytes, params.lambda_bits());
    if &needed > params.blocks_per_file() {
        return Err(PlanError::FileExceedsBlocks {
            file_size_bytes: file_size_bytes.clone(),
            needed,
            allowed: params.blocks_per_file().clone(),
        });
    }

    let infeasible = |reason: &str| PlanError::Infeasible {
        mode,
        eps_max: params.eps_max().clone(),
        reason: reason.to_string(),
    };

    let coeffs = bound_coefficients(mode, params);
    let budget = params
        .eps_max()
        .checked_sub(&coeffs.constant)
        .ok_or_else(|| infeasible("below the bound's zero-file floor"))?;
    let q_star = max_q_quadratic(&coeffs.quadratic, &coeffs.linear, &budget)?;
    if q_star.is_zero() {
        return Err(infeasible("not even one file satisfies the bound"));
    }

    let eps_at_q_star = raw_bound(mode, params, &Rational::from(q_star.clone()));
    let worst_case_bits =
        security_level_bits(&AdvantageValue::new(eps_at_q_star.clone())?, DEFAULT_PRECISION)?;
    Ok(RotationPlan {
        mode,
        params: params.clone(),
        max_data_volume_bytes: &q_star * file_size_bytes,
        q_star,
        eps_at_q_star,
        worst_case_bits,
        file_size_bytes: file_size_bytes.clone(),
    })
}

/// Security gain of splitting Q* files over `k` keys, via two routes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImprovementReport {
    pub k: Natural,
    pub delta_bits: FixedDecimal,
    pub lower_bound_bits: FixedDecimal,
    pub upper_bound_bits: FixedDecimal,
    pub closed_form_bits: FixedDecimal,
    pub direct_difference_bits: FixedDecimal,
    /// `bound(Q*) / bound(Q*/k)`, exact.
    #[serde(skip)]
    pub advantage_ratio: Rational,
}

impl ImprovementReport {
    /// `log2 k < delta < 2 log2 k`, decided exactly as `k < ratio < k^2`.
    pub fn strictly_bracketed(&self) -> bool {
        let k = Rational::from(self.k.clone());
        let k_sq = &k * &k;
        k < self.advantage_ratio && self.advantage_ratio < k_sq
    }
}

// Extra digits carried through each logarithm before the final rounding.
const GUARD_DIGITS: u32 = 6;

/// The `X` in the closed form `log2 k + log2(1 + X)`.
fn closed_form_excess(mode: Mode, params: &SecurityParams, q: &Natural, k: &Natural) -> Rational {
    let n = params.domain_size();
    let s = params.s_min();
    let l = params.blocks_per_file();
    let km1 = k.checked_sub(&Natural::one()).expect("k >= 1");
    let frac = |num: Natural, den: Natural| Rational::new(num, den).expect("positive denominator");
    match mode {
        Mode::Ctr => {
            let qs = q * s;
            frac(&km1 * &qs * 2u64, k * n + &(qs * 2u64))
        }
        Mode::Cbc => {
            let qls = q * l * s;
            frac(&km1 * &qls * 2u64, k * n + &(qls * 2u64))
        }
        Mode::EcbcMac => {
            // [Q^2(l^2+1)(1 - 1/k) + 2(1 - k)] / [2D Q l / s + Q^2(l^2+1)/k + 2k]
            let d = params.ecbc_divisor();
            let kr = Rational::from(k.clone());
            let collision = Rational::from(q * q * &(l * l + 1u64));
            let num = (&collision / &kr)
                .checked_sub(&Rational::from(2u64))
                .expect("Q^2(l^2+1) >= 2k when Q >= k")
                * Rational::from(km1);
            let den = frac(&d * 2u64 * q * l, s.clone()) + &collision / &kr + Rational::from(k * 2u64);
            &num / &den
        }
    }
}

pub fn improvement_bits(
    mode: Mode,
    params: &SecurityParams,
    q_star: &Natural,
    k: &Natural,
) -> Result<ImprovementReport, PlanError> {
    improvement_bits_with_precision(mode, params, q_star, k, DEFAULT_PRECISION)
}

pub fn improvement_bits_with_precision(
    mode: Mode,
    params: &SecurityParams,
    q_star: &Natural,
    k: &Natural,
    precision: u32,
) -> Result<ImprovementReport, PlanError> {
    if k.is_zero() {
        return Err(PlanError::ZeroK);
    }
    if k > q_star {
        return Err(PlanError::KExceedsQStar { k: k.clone(), q_star: q_star.clone() });
    }
    let wp = precision + GUARD_DIGITS;
    let q = Rational::from(q_star.clone());
    let kr = Rational::from(k.clone());

    let full = raw_bound(mode, params, &q);
    let split = raw_bound(mode, params, &(&q / &kr));
    if split.is_zero() {
        return Err(AdvError::Unbounded.into());
    }
    let direct = &log2_rational(&full, wp)? - &log2_rational(&split, wp)?;

    let log_k = log2_rational(&kr, wp)?;
    let excess = closed_form_excess(mode, params, q_star, k);
    let closed = &log_k + &log2_rational(&(Rational::one() + excess), wp)?;

    Ok(ImprovementReport {
        k: k.clone(),
        delta_bits: direct.rescale(precision),
        lower_bound_bits: log_k.rescale(precision),
        upper_bound_bits: (&log_k + &log_k).rescale(precision),
        closed_form_bits: closed.rescale(precision),
        direct_difference_bits: direct.rescale(precision),
        advantage_ratio: &full / &split,
    })
}

/// Dimensionless per-cost improvement score `Q* * delta / (k * cost)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenefitReport {
    pub k: Natural,
    pub key_cost: Rational,
    pub delta_bits: FixedDecimal,
    pub benefit: FixedDecimal,
}

pub fn benefit(
    mode: Mode,
    params: &SecurityParams,
    q_star: &Natural,
    k: &Natural,
    key_cost: &Rational,
) -> Result<BenefitReport, PlanError> {
    benefit_with_precision(mode, params, q_star, k, key_cost, DEFAULT_PRECISION)
}

pub fn benefit_with_precision(
    mode: Mode,
    params: &SecurityParams,
    q_star: &Natural,
    k: &Natural,
    key_cost: &Rational,
    precision: u32,
) -> Result<BenefitReport, PlanError> {
    if key_cost.is_zero() {
        return Err(PlanError::NonPositiveCost);
    }
    if k.is_zero() {
        return Err(PlanError::ZeroK);
    }
    let factor = Rational::from(q_star.clone()) / (Rational::from(k.clone()) * key_cost);
    // The factor magnifies delta's rounding error; buy that many extra digits.
    let magnitude_digits = (factor.floor().bits() as f64 * std::f64::consts::LOG10_2).ceil() as u32;
    let fine = improvement_bits_with_precision(mode, params, q_star, k, precision + magnitude_digits + 2)?;
    Ok(BenefitReport {
        k: k.clone(),
        key_cost: key_cost.clone(),
        delta_bits: fine.delta_bits.rescale(precision),
        benefit: fine.delta_bits.mul_rational(&factor, precision),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub k: Natural,
    pub delta_bits: FixedDecimal,
    pub lower_log2k: FixedDecimal,
    pub upper_2log2k: FixedDecimal,
    pub benefit: FixedDecimal,
}

/// One row per `k`; the first failing `k` aborts the sweep.
pub fn sweep_k(
    mode: Mode,
    params: &SecurityParams,
    q_star: &Natural,
    k_values: &[Natural],
    key_cost: &Rational,
) -> Result<Vec<SweepRow>, PlanError> {
    k_values
        .iter()
        .map(|k| {
            let wrap = |e: PlanError| PlanError::SweepRow { k: k.clone(), source: Box::new(e) };
            let imp = improvement_bits(mode, params, q_star, k).map_err(wrap)?;
            let ben = benefit(mode, params, q_star, k, key_cost).map_err(wrap)?;
            Ok(SweepRow {
                k: k.clone(),
                delta_bits: imp.delta_bits,
                lower_log2k: imp.lower_bound_bits,
                upper_2log2k: imp.upper_bound_bits,
                benefit: ben.benefit,
            })
        })
        .collect()
}
