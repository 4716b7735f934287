use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::RotationError;
use crate::exactmath::Rational;

/// One QKD-delivered key.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyRecord {
    pub key_id: u64,
    pub key_material: Vec<u8>,
    pub cost: Rational,
    pub consumed: bool,
}

impl std::fmt::Debug for KeyRecord {
    // Key material stays out of logs.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyRecord")
            .field("key_id", &self.key_id)
            .field("key_bits", &(self.key_material.len() * 8))
            .field("cost", &self.cost)
            .field("consumed", &self.consumed)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeySource {
    File(PathBuf),
    Simulated { seed: u64 },
}

#[derive(Debug)]
struct PoolInner {
    available: VecDeque<KeyRecord>,
    dispensed: u64,
}

/// Ordered supply of keys. Dispensing takes the pool lock, so sessions
/// sharing one pool through an `Arc` never receive the same key.
#[derive(Debug)]
pub struct KeyPool {
    key_len_bits: u32,
    source: KeySource,
    rate_bits_per_sec: Option<u64>,
    inner: Mutex<PoolInner>,
}

fn check_key_len(key_len_bits: u32) -> Result<(), RotationError> {
    if key_len_bits == 0 || key_len_bits % 8 != 0 {
        return Err(RotationError::InvalidKeyLength(key_len_bits));
    }
    Ok(())
}

impl KeyPool {
    fn from_records(key_len_bits: u32, source: KeySource, keys: Vec<KeyRecord>) -> Self {
        KeyPool {
            key_len_bits,
            source,
            rate_bits_per_sec: None,
            inner: Mutex::new(PoolInner { available: keys.into(), dispensed: 0 }),
        }
    }

    /// Deterministic stand-in for a QKD link: `count` keys from a seeded CSPRNG.
    pub fn simulated(seed: u64, count: usize, key_len_bits: u32) -> Result<Self, RotationError> {
        check_key_len(key_len_bits)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let keys = (0..count)
            .map(|i| {
                let mut material = vec![0u8; key_len_bits as usize / 8];
                rng.fill_bytes(&mut material);
                KeyRecord { key_id: i as u64 + 1, key_material: material, cost: Rational::one(), consumed: false }
            })
            .collect();
        Ok(Self::from_records(key_len_bits, KeySource::Simulated { seed }, keys))
    }

    /// Sets the same price on every key still in the pool.
    pub fn with_key_cost(self, cost: Rational) -> Self {
        {
            let mut inner = self.inner.lock().expect("pool lock");
            inner.available.iter_mut().for_each(|k| k.cost = cost.clone());
        }
        self
    }

    pub fn with_rate(mut self, bits_per_sec: u64) -> Self {
        self.rate_bits_per_sec = Some(bits_per_sec);
        self
    }

    pub fn key_len_bits(&self) -> u32 {
        self.key_len_bits
    }

    pub fn source(&self) -> &KeySource {
        &self.source
    }

    pub fn rate_bits_per_sec(&self) -> Option<u64> {
        self.rate_bits_per_sec
    }

    pub fn remaining(&self) -> usize {
        self.inner.lock().expect("pool lock").available.len()
    }

    pub fn dispensed(&self) -> u64 {
        self.inner.lock().expect("pool lock").dispensed
    }

    /// Seconds of link time to deliver `keys` fresh keys at the simulated rate.
    pub fn refill_seconds(&self, keys: u64) -> Option<Rational> {
        let rate = self.rate_bits_per_sec.filter(|&r| r > 0)?;
        Rational::new((keys * self.key_len_bits as u64).into(), rate.into()).ok()
    }

    /// Hands out the next key in order and marks it consumed.
    pub fn dispense(&self) -> Result<KeyRecord, RotationError> {
        let mut inner = self.inner.lock().expect("pool lock");
        let mut key = inner.available.pop_front().ok_or(RotationError::PoolExhausted)?;
        key.consumed = true;
        inner.dispensed += 1;
        Ok(key)
    }

    /// Removes keys up to and including `key_id`, returning that key. Used
    /// when resuming a persisted session from a re-ingested key file.
    pub fn reclaim_through(&self, key_id: u64) -> Result<KeyRecord, RotationError> {
        let mut inner = self.inner.lock().expect("pool lock");
        while let Some(mut key) = inner.available.pop_front() {
            if key.key_id == key_id {
                key.consumed = true;
                inner.dispensed += 1;
                return Ok(key);
            }
            if key.key_id > key_id {
                inner.available.push_front(key);
                break;
            }
        }
        Err(RotationError::UnknownKey(key_id))
    }
}

/// Reads hex-encoded keys, one per line. Blank lines are skipped; key ids are
/// assigned from 1 in file order.
pub fn ingest_keys(path: impl AsRef<Path>, key_len_bits: u32) -> Result<KeyPool, RotationError> {
    check_key_len(key_len_bits)?;
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| RotationError::io(path, e))?;
    let expected_digits = key_len_bits as usize / 4;
    let mut keys = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: String| RotationError::MalformedKey { line: idx + 1, reason };
        if line.len() % 2 != 0 {
            return Err(malformed(format!("odd number of hex digits ({})", line.len())));
        }
        let material = hex::decode(line).map_err(|e| malformed(e.to_string()))?;
        if line.len() != expected_digits {
            return Err(malformed(format!(
                "expected {key_len_bits}-bit key ({expected_digits} hex digits), found {} digits",
                line.len()
            )));
        }
        keys.push(KeyRecord {
            key_id: keys.len() as u64 + 1,
            key_material: material,
            cost: Rational::one(),
            consumed: false,
        });
    }
    Ok(KeyPool::from_records(key_len_bits, KeySource::File(path.to_path_buf()), keys))
}
