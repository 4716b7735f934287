use super::EmpiricsError;

/// A block cipher over `0..2^block_bits`, the pluggable primitive under the
/// toy modes.
pub trait BlockCipher {
    fn block_bits(&self) -> u32;
    fn encrypt_block(&self, block: u64) -> u64;
    fn decrypt_block(&self, block: u64) -> u64;

    fn domain_size(&self) -> u64 {
        1u64 << self.block_bits()
    }
}

pub const MIN_BLOCK_BITS: u32 = 8;
pub const MAX_BLOCK_BITS: u32 = 24;
pub const MIN_ROUNDS: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToyCipherParams {
    pub block_bits: u32,
    pub key_seed: u64,
    pub rounds: u32,
}

impl ToyCipherParams {
    pub fn new(block_bits: u32, key_seed: u64, rounds: u32) -> Self {
        ToyCipherParams { block_bits, key_seed, rounds }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Balanced Feistel permutation over `block_bits`. Odd widths run the network
/// one bit wider and cycle-walk back into the domain.
#[derive(Clone, Debug)]
pub struct ToyPrp {
    params: ToyCipherParams,
    half_bits: u32,
    round_keys: Vec<u64>,
}

impl ToyPrp {
    /// Builds the permutation; for `block_bits <= 16` bijectivity is checked
    /// exhaustively.
    pub fn new(params: ToyCipherParams) -> Result<Self, EmpiricsError> {
        let prp = Self::new_unchecked(params)?;
        if params.block_bits <= 16 && !prp.is_bijection() {
            return Err(EmpiricsError::InvalidCipher(format!(
                "round function produced a non-bijective map for {params:?}"
            )));
        }
        Ok(prp)
    }

    /// Skips the exhaustive bijection check. Parameters are still validated.
    pub fn new_unchecked(params: ToyCipherParams) -> Result<Self, EmpiricsError> {
        if !(MIN_BLOCK_BITS..=MAX_BLOCK_BITS).contains(&params.block_bits) {
            return Err(EmpiricsError::InvalidCipher(format!(
                "block_bits must be in {MIN_BLOCK_BITS}..={MAX_BLOCK_BITS}, got {}",
                params.block_bits
            )));
        }
        if params.rounds < MIN_ROUNDS {
            return Err(EmpiricsError::InvalidCipher(format!(
                "at least {MIN_ROUNDS} rounds required, got {}",
                params.rounds
            )));
        }
        let mut state = params.key_seed;
        let round_keys = (0..params.rounds)
            .map(|_| {
                state = splitmix64(state);
                state
            })
            .collect();
        Ok(ToyPrp { params, half_bits: params.block_bits.div_ceil(2), round_keys })
    }

    pub fn params(&self) -> ToyCipherParams {
        self.params
    }

    fn half_mask(&self) -> u64 {
        (1u64 << self.half_bits) - 1
    }

    fn round(&self, key: u64, half: u64) -> u64 {
        splitmix64(key ^ half.wrapping_mul(0xd6e8_feb8_6659_fd93)) & self.half_mask()
    }

    fn feistel_forward(&self, x: u64) -> u64 {
        let mask = self.half_mask();
        let (mut left, mut right) = (x >> self.half_bits, x & mask);
        for &k in &self.round_keys {
            (left, right) = (right, left ^ self.round(k, right));
        }
        (left << self.half_bits) | right
    }

    fn feistel_backward(&self, y: u64) -> u64 {
        let mask = self.half_mask();
        let (mut left, mut right) = (y >> self.half_bits, y & mask);
        for &k in self.round_keys.iter().rev() {
            (left, right) = (right ^ self.round(k, left), left);
        }
        (left << self.half_bits) | right
    }

    fn check_range(&self, block: u64) -> Result<(), EmpiricsError> {
        if block >= self.domain_size() {
            return Err(EmpiricsError::OutOfRange { block, block_bits: self.params.block_bits });
        }
        Ok(())
    }

    pub fn permute(&self, block: u64) -> Result<u64, EmpiricsError> {
        self.check_range(block)?;
        Ok(self.encrypt_block(block))
    }

    pub fn inverse(&self, block: u64) -> Result<u64, EmpiricsError> {
        self.check_range(block)?;
        Ok(self.decrypt_block(block))
    }

    fn is_bijection(&self) -> bool {
        let n = self.domain_size() as usize;
        let mut seen = vec![false; n];
        for x in 0..n as u64 {
            let y = self.encrypt_block(x) as usize;
            if y >= n || std::mem::replace(&mut seen[y], true) {
                return false;
            }
        }
        true
    }
}

impl BlockCipher for ToyPrp {
    fn block_bits(&self) -> u32 {
        self.params.block_bits
    }

    fn encrypt_block(&self, block: u64) -> u64 {
        let n = self.domain_size();
        let mut y = self.feistel_forward(block);
        // Cycle-walk; only loops for odd widths.
        while y >= n {
            y = self.feistel_forward(y);
        }
        y
    }

    fn decrypt_block(&self, block: u64) -> u64 {
        let n = self.domain_size();
        let mut x = self.feistel_backward(block);
        while x >= n {
            x = self.feistel_backward(x);
        }
        x
    }
}
