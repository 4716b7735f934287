//! The SM4 worked example: 128-bit blocks, 121-bit average strength,
//! 1.5 KB files, 80-bit target.

use crate::advmodel::SecurityParams;
use crate::exactmath::{Natural, Rational};
use crate::planner::blocks_per_file;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sm4Example {
    pub lambda_bits: u32,
    pub s_min_bits: u32,
    pub block_bits: u32,
    pub file_size_bytes: u64,
    pub target_bits: u32,
}

impl Default for Sm4Example {
    fn default() -> Self {
        Sm4Example { lambda_bits: 128, s_min_bits: 121, block_bits: 128, file_size_bytes: 1536, target_bits: 80 }
    }
}

impl Sm4Example {
    pub fn file_size_bytes(&self) -> Natural {
        Natural::from(self.file_size_bytes)
    }

    pub fn blocks_per_file(&self) -> Natural {
        blocks_per_file(&self.file_size_bytes(), self.block_bits as u64).expect("valid example sizes")
    }

    pub fn eps_max(&self) -> Rational {
        Rational::pow2(-(self.target_bits as i64))
    }

    /// Parameters with the default (2N) ECBC-MAC denominator.
    pub fn params(&self) -> SecurityParams {
        SecurityParams::new(self.lambda_bits, self.s_min_bits, self.blocks_per_file(), self.eps_max())
            .expect("valid example parameters")
    }
}

/// Values reported for the worked example. Decimals are kept as written so
/// they can be compared exactly.
pub mod reported {
    pub const CTR_Q_STAR: u64 = 1_210_759;
    pub const CBC_Q_STAR: u64 = 123_575;
    pub const ECBC_Q_STAR: u64 = 174_700;
    pub const CTR_DELTA_K2: &str = "1.999923";
    pub const CBC_DELTA_K2: &str = "1.999992";
    pub const ECBC_DELTA_K2: &str = "1.99996";
    pub const CTR_VOLUME_KB: &str = "1816138.5";
    pub const CTR_VOLUME_MB: &str = "1773.5";
    pub const CBC_VOLUME_MB: &str = "181";
    pub const ECBC_VOLUME_MB: &str = "256";
}
