//! Desk-scale model of the modes and Monte Carlo checks of the birthday terms.
//!
//! The toy cipher is a keyed Feistel permutation over 8 to 24 bits, small
//! enough that collisions actually happen within `10^5` trials and the
//! `2Q^2 l / N` and `2Q^2 l^2 / N` terms can be compared against reality.

mod modes;
mod montecarlo;
mod prp;

use thiserror::Error;

pub use modes::{
    cbc_decrypt, cbc_encrypt, cbc_residue, ctr_decrypt, ctr_encrypt, ctr_keystream, ecbc_mac,
};
pub use montecarlo::{
    estimate_collision_probability, theoretical_bound, EmpiricalResult, TrialConfig, MIN_TRIALS,
    Z_99,
};
pub use prp::{BlockCipher, ToyCipherParams, ToyPrp, MAX_BLOCK_BITS, MIN_BLOCK_BITS, MIN_ROUNDS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmpiricsError {
    #[error("invalid toy cipher: {0}")]
    InvalidCipher(String),
    #[error("block {block} is outside the {block_bits}-bit domain")]
    OutOfRange { block: u64, block_bits: u32 },
    #[error("message must contain at least one block")]
    EmptyMessage,
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
    #[error("{0} trials requested; at least {MIN_TRIALS} are needed for a meaningful interval")]
    TooFewTrials(u64),
}
