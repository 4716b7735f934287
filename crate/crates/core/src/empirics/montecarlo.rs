use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::modes::cbc_encrypt;
use super::prp::{ToyCipherParams, ToyPrp, MAX_BLOCK_BITS, MIN_BLOCK_BITS};
use super::EmpiricsError;
use crate::advmodel::Mode;
use crate::exactmath::{Natural, Rational};

pub const MIN_TRIALS: u64 = 1000;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

const TRIAL_CIPHER_ROUNDS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub mode: Mode,
    pub block_bits: u32,
    pub q_files: u64,
    pub blocks_per_file: u64,
    pub trials: u64,
    pub rng_seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), EmpiricsError> {
        if self.mode == Mode::EcbcMac {
            return Err(EmpiricsError::InvalidConfig("collision simulation covers CTR and CBC only".into()));
        }
        if !(MIN_BLOCK_BITS..=MAX_BLOCK_BITS).contains(&self.block_bits) {
            return Err(EmpiricsError::InvalidConfig(format!(
                "block_bits must be in {MIN_BLOCK_BITS}..={MAX_BLOCK_BITS}"
            )));
        }
        if self.q_files == 0 || self.blocks_per_file == 0 {
            return Err(EmpiricsError::InvalidConfig("q_files and blocks_per_file must be positive".into()));
        }
        let total = self.q_files.checked_mul(self.blocks_per_file);
        if total.is_none_or(|t| t > 1u64 << self.block_bits) {
            return Err(EmpiricsError::InvalidConfig(format!(
                "q_files * blocks_per_file exceeds the 2^{} domain",
                self.block_bits
            )));
        }
        if self.trials < MIN_TRIALS {
            return Err(EmpiricsError::TooFewTrials(self.trials));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalResult {
    pub collisions: u64,
    pub trials: u64,
    pub collision_fraction: f64,
    pub theoretical_bound: Rational,
    pub half_width_99: f64,
}

impl EmpiricalResult {
    pub fn bound_f64(&self) -> f64 {
        self.theoretical_bound.to_f64()
    }

    /// One-sided soundness: `fraction - half_width <= bound`.
    pub fn bound_respected(&self) -> bool {
        self.collision_fraction - self.half_width_99 <= self.bound_f64()
    }
}

/// `2Q^2 l / N` for CTR, `2Q^2 l^2 / N` for CBC (unclamped).
pub fn theoretical_bound(mode: Mode, block_bits: u32, q_files: u64, blocks_per_file: u64) -> Rational {
    let q = Natural::from(q_files);
    let l = Natural::from(blocks_per_file);
    let num = match mode {
        Mode::Cbc => &q * &q * &l * &l * 2u64,
        _ => &q * &q * &l * 2u64,
    };
    Rational::new(num, Natural::pow2(block_bits as u64)).expect("nonzero")
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Any two length-`l` counter ranges with uniform random starts overlap.
fn ctr_trial(rng: &mut ChaCha8Rng, cfg: &TrialConfig) -> bool {
    let n = 1u64 << cfg.block_bits;
    let l = cfg.blocks_per_file;
    let mut ivs: Vec<u64> = (0..cfg.q_files).map(|_| rng.random_range(0..n)).collect();
    any_counter_overlap(&mut ivs, n, l)
}

/// Sorted starts expose the closest pair as a neighbour, including the pair
/// that straddles the wrap from `n - 1` to `0`.
fn any_counter_overlap(starts: &mut [u64], n: u64, l: u64) -> bool {
    if starts.len() < 2 {
        return false;
    }
    starts.sort_unstable();
    let wrap_gap = starts[0] + n - starts[starts.len() - 1];
    wrap_gap < l || starts.windows(2).any(|w| w[1] - w[0] < l)
}

/// Open-addressing set sized for at most `cap` distinct blocks.
struct BlockSet {
    slots: Vec<u64>,
    mask: usize,
}

impl BlockSet {
    const EMPTY: u64 = u64::MAX;

    fn with_capacity(cap: usize) -> Self {
        let size = (2 * cap).next_power_of_two();
        BlockSet { slots: vec![Self::EMPTY; size], mask: size - 1 }
    }

    /// Returns false if `block` was already present.
    fn insert(&mut self, block: u64) -> bool {
        let mut i = (block.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 32) as usize & self.mask;
        loop {
            match self.slots[i] {
                Self::EMPTY => {
                    self.slots[i] = block;
                    return true;
                }
                b if b == block => return false,
                _ => i = (i + 1) & self.mask,
            }
        }
    }
}

/// Any repeated block among all ciphertexts of random files under a fresh
/// key. Stops at the first repeat.
fn cbc_trial(rng: &mut ChaCha8Rng, cfg: &TrialConfig) -> bool {
    let n = 1u64 << cfg.block_bits;
    let cipher = ToyPrp::new_unchecked(ToyCipherParams::new(cfg.block_bits, rng.random(), TRIAL_CIPHER_ROUNDS))
        .expect("validated block width");
    let mut seen = BlockSet::with_capacity((cfg.q_files * cfg.blocks_per_file) as usize);
    let mut plaintext = vec![0u64; cfg.blocks_per_file as usize];
    for _ in 0..cfg.q_files {
        let iv = rng.random_range(0..n);
        plaintext.iter_mut().for_each(|p| *p = rng.random_range(0..n));
        for c in cbc_encrypt(&cipher, iv, &plaintext).expect("blocks in range") {
            if !seen.insert(c) {
                return true;
            }
        }
    }
    false
}

/// Runs `trials` independent trials in parallel. Trial `i` draws from its own
/// stream of `(rng_seed, i)`, so the result does not depend on scheduling.
pub fn estimate_collision_probability(cfg: &TrialConfig) -> Result<EmpiricalResult, EmpiricsError> {
    cfg.validate()?;
    let collisions: u64 = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.rng_seed, t);
            let hit = match cfg.mode {
                Mode::Ctr => ctr_trial(&mut rng, cfg),
                _ => cbc_trial(&mut rng, cfg),
            };
            hit as u64
        })
        .sum();
    let n = cfg.trials as f64;
    let p = collisions as f64 / n;
    Ok(EmpiricalResult {
        collisions,
        trials: cfg.trials,
        collision_fraction: p,
        theoretical_bound: theoretical_bound(cfg.mode, cfg.block_bits, cfg.q_files, cfg.blocks_per_file),
        half_width_99: Z_99 * (p * (1.0 - p) / n).sqrt(),
    })
}
