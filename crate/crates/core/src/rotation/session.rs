use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pool::{KeyPool, KeyRecord};
use super::RotationError;
use crate::advmodel::{Mode, SecurityParams};
use crate::empirics::{cbc_decrypt, cbc_encrypt, ctr_decrypt, ctr_encrypt, ecbc_mac, ToyCipherParams, ToyPrp};
use crate::exactmath::{Natural, Rational};
use crate::planner::{compute_q_star, RotationPlan};

/// Width of the toy cipher that stands in for the real block cipher.
pub const TOY_BLOCK_BITS: u32 = 16;
const TOY_ROUNDS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationEvent {
    pub event_index: u64,
    pub old_key_id: u64,
    pub new_key_id: u64,
    /// Files processed before the file that triggered the rotation.
    pub at_file_count: u64,
}

/// Persistable ledger of one session. Key material is deliberately not part
/// of it; only the id of the key in use is recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionState {
    pub(crate) mode: Mode,
    pub(crate) plan: RotationPlan,
    pub(crate) rotation_factor: u64,
    pub(crate) current_key_id: u64,
    pub(crate) files_under_current_key: u64,
    pub(crate) total_files: u64,
    pub(crate) keys_consumed: u64,
    pub(crate) total_cost: Rational,
    pub(crate) events: Vec<RotationEvent>,
    pub(crate) closed: bool,
}

impl SessionState {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn plan(&self) -> &RotationPlan {
        &self.plan
    }

    pub fn rotation_factor(&self) -> u64 {
        self.rotation_factor
    }

    /// Files each key may encrypt: `floor(Q* / k)`.
    pub fn interval(&self) -> Natural {
        &self.plan.q_star / self.rotation_factor
    }

    pub fn current_key_id(&self) -> u64 {
        self.current_key_id
    }

    pub fn files_under_current_key(&self) -> u64 {
        self.files_under_current_key
    }

    pub fn total_files(&self) -> u64 {
        self.total_files
    }

    pub fn keys_consumed(&self) -> u64 {
        self.keys_consumed
    }

    pub fn total_cost(&self) -> &Rational {
        &self.total_cost
    }

    pub fn events(&self) -> &[RotationEvent] {
        &self.events
    }

    pub fn rotations(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Checks the counters against each other and against the plan.
    pub(crate) fn check_invariants(&self) -> Result<(), RotationError> {
        let bad = |m: String| Err(RotationError::InvariantViolation(m));
        let interval = self.interval();
        if self.rotation_factor == 0 || interval.is_zero() {
            return bad(format!("rotation factor {} leaves no files per key", self.rotation_factor));
        }
        if Natural::from(self.files_under_current_key) > interval {
            return bad(format!(
                "{} files under key {} exceed the interval {interval}",
                self.files_under_current_key, self.current_key_id
            ));
        }
        let expected_keys = Natural::from(self.total_files).div_ceil(&interval).to_u64().unwrap_or(0).max(1);
        if self.keys_consumed != expected_keys {
            return bad(format!(
                "{} keys consumed for {} files, expected {expected_keys}",
                self.keys_consumed, self.total_files
            ));
        }
        let done_before = Natural::from(self.keys_consumed - 1) * &interval;
        if Natural::from(self.total_files) != done_before + Natural::from(self.files_under_current_key) {
            return bad("file counters disagree with the number of keys".into());
        }
        if self.events.len() as u64 != self.keys_consumed - 1 {
            return bad(format!("{} events for {} keys", self.events.len(), self.keys_consumed));
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.event_index != i as u64 || e.new_key_id <= e.old_key_id {
                return bad(format!("event {i} is out of sequence"));
            }
        }
        if let Some(last) = self.events.last() {
            if last.new_key_id != self.current_key_id {
                return bad("last event does not lead to the current key".into());
            }
        }
        Ok(())
    }
}

/// Output of one `encrypt_file`. For ECBC-MAC the body is the plaintext and
/// `tag` authenticates it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SealedFile {
    pub key_id: u64,
    pub iv: u64,
    pub body: Vec<u8>,
    pub plaintext_len: usize,
    pub tag: Option<u64>,
}

fn fold_seed(bytes: &[u8]) -> u64 {
    bytes.chunks(8).fold(0u64, |acc, c| {
        let mut w = [0u8; 8];
        w[..c.len()].copy_from_slice(c);
        acc.rotate_left(23) ^ u64::from_le_bytes(w)
    })
}

struct KeyCiphers {
    primary: ToyPrp,
    outer: ToyPrp,
    iv_seed: u64,
}

impl KeyCiphers {
    /// CTR and CBC key the toy cipher from the whole key; ECBC-MAC splits the
    /// material into its two keys.
    fn derive(mode: Mode, key: &KeyRecord) -> Result<Self, RotationError> {
        let m = &key.key_material;
        let (first, second) = match mode {
            Mode::EcbcMac => m.split_at(m.len() / 2),
            _ => (&m[..], &m[..]),
        };
        let toy = |seed| ToyPrp::new_unchecked(ToyCipherParams::new(TOY_BLOCK_BITS, seed, TOY_ROUNDS));
        let s1 = fold_seed(first);
        Ok(KeyCiphers { primary: toy(s1)?, outer: toy(!fold_seed(second))?, iv_seed: s1.rotate_left(32) })
    }

    fn iv(&self, file_index: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.iv_seed);
        rng.set_stream(file_index);
        rng.random_range(0..(1u64 << TOY_BLOCK_BITS))
    }
}

fn to_blocks(bytes: &[u8]) -> Vec<u64> {
    bytes
        .chunks(2)
        .map(|c| ((c[0] as u64) << 8) | c.get(1).copied().unwrap_or(0) as u64)
        .collect()
}

fn from_blocks(blocks: &[u64], len: usize) -> Vec<u8> {
    let mut out: Vec<u8> = blocks.iter().flat_map(|&b| [(b >> 8) as u8, b as u8]).collect();
    out.truncate(len);
    out
}

fn seal(
    mode: Mode,
    key: &KeyRecord,
    ciphers: &KeyCiphers,
    file_index: u64,
    plaintext: &[u8],
    blocks: &[u64],
) -> Result<SealedFile, RotationError> {
    let iv = ciphers.iv(file_index);
    let (body, tag) = match mode {
        Mode::Ctr => (from_blocks(&ctr_encrypt(&ciphers.primary, iv, blocks)?, blocks.len() * 2), None),
        Mode::Cbc => (from_blocks(&cbc_encrypt(&ciphers.primary, iv, blocks)?, blocks.len() * 2), None),
        Mode::EcbcMac => {
            let msg = if blocks.is_empty() { &[0u64][..] } else { blocks };
            (plaintext.to_vec(), Some(ecbc_mac(&ciphers.primary, &ciphers.outer, msg)?))
        }
    };
    Ok(SealedFile { key_id: key.key_id, iv, body, plaintext_len: plaintext.len(), tag })
}

/// Recovers the plaintext of a sealed file (or verifies its tag).
pub fn open_sealed(mode: Mode, key: &KeyRecord, sealed: &SealedFile) -> Result<Vec<u8>, RotationError> {
    if key.key_id != sealed.key_id {
        return Err(RotationError::UnknownKey(sealed.key_id));
    }
    let ciphers = KeyCiphers::derive(mode, key)?;
    let blocks = to_blocks(&sealed.body);
    match mode {
        Mode::Ctr => Ok(from_blocks(&ctr_decrypt(&ciphers.primary, sealed.iv, &blocks)?, sealed.plaintext_len)),
        Mode::Cbc => Ok(from_blocks(&cbc_decrypt(&ciphers.primary, sealed.iv, &blocks)?, sealed.plaintext_len)),
        Mode::EcbcMac => {
            let msg = if blocks.is_empty() { vec![0u64] } else { blocks };
            let tag = ecbc_mac(&ciphers.primary, &ciphers.outer, &msg)?;
            if Some(tag) != sealed.tag {
                return Err(RotationError::Corrupt("tag mismatch".into()));
            }
            Ok(sealed.body.clone())
        }
    }
}

/// A live session: the ledger plus the pool and current key it draws on.
pub struct Session {
    state: SessionState,
    pool: Arc<KeyPool>,
    key: KeyRecord,
    ciphers: KeyCiphers,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session").field("state", &self.state).field("key", &self.key).finish()
    }
}

pub fn open_session(
    pool: Arc<KeyPool>,
    mode: Mode,
    params: &SecurityParams,
    file_size_bytes: &Natural,
) -> Result<Session, RotationError> {
    open_session_with_factor(pool, mode, params, file_size_bytes, 1)
}

/// Opens a session that rotates `k` times as often as the plan allows.
pub fn open_session_with_factor(
    pool: Arc<KeyPool>,
    mode: Mode,
    params: &SecurityParams,
    file_size_bytes: &Natural,
    k: u64,
) -> Result<Session, RotationError> {
    let plan = compute_q_star(mode, params, file_size_bytes)?;
    if k == 0 || Natural::from(k) > plan.q_star {
        return Err(RotationError::InvalidFactor(k));
    }
    let key = pool.dispense()?;
    let ciphers = KeyCiphers::derive(mode, &key)?;
    let state = SessionState {
        mode,
        plan,
        rotation_factor: k,
        current_key_id: key.key_id,
        files_under_current_key: 0,
        total_files: 0,
        keys_consumed: 1,
        total_cost: key.cost.clone(),
        events: Vec::new(),
        closed: false,
    };
    Ok(Session { state, pool, key, ciphers })
}

impl Session {
    /// Continues a persisted session. The pool must still hold the session's
    /// current key; it and every earlier key are removed from the pool.
    pub fn resume(state: SessionState, pool: Arc<KeyPool>) -> Result<Self, RotationError> {
        if state.closed {
            return Err(RotationError::SessionClosed);
        }
        state.check_invariants()?;
        let key = pool.reclaim_through(state.current_key_id)?;
        let ciphers = KeyCiphers::derive(state.mode, &key)?;
        Ok(Session { state, pool, key, ciphers })
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn into_state(self) -> SessionState {
        self.state
    }

    pub fn current_key(&self) -> &KeyRecord {
        &self.key
    }

    pub fn pool(&self) -> &Arc<KeyPool> {
        &self.pool
    }

    /// Encrypts (or for ECBC-MAC, tags) one file, rotating first if the
    /// current key has reached its interval.
    pub fn encrypt_file(&mut self, file: &[u8]) -> Result<(SealedFile, Option<RotationEvent>), RotationError> {
        if self.state.closed {
            return Err(RotationError::SessionClosed);
        }
        let size = file.len() as u64;
        if Natural::from(size) > self.state.plan.file_size_bytes {
            return Err(RotationError::OversizedFile { size, limit: self.state.plan.file_size_bytes.to_string() });
        }
        let blocks = to_blocks(file);
        let event = if Natural::from(self.state.files_under_current_key) >= self.state.interval() {
            Some(self.rotate()?)
        } else {
            None
        };
        let sealed = seal(
            self.state.mode,
            &self.key,
            &self.ciphers,
            self.state.files_under_current_key,
            file,
            &blocks,
        )?;
        self.state.files_under_current_key += 1;
        self.state.total_files += 1;
        Ok((sealed, event))
    }

    fn rotate(&mut self) -> Result<RotationEvent, RotationError> {
        let next = match self.pool.dispense() {
            Ok(k) => k,
            Err(e) => {
                self.state.closed = true;
                return Err(e);
            }
        };
        let ciphers = KeyCiphers::derive(self.state.mode, &next)?;
        let event = RotationEvent {
            event_index: self.state.events.len() as u64,
            old_key_id: self.key.key_id,
            new_key_id: next.key_id,
            at_file_count: self.state.total_files,
        };
        self.state.events.push(event);
        self.state.current_key_id = next.key_id;
        self.state.files_under_current_key = 0;
        self.state.keys_consumed += 1;
        self.state.total_cost = &self.state.total_cost + &next.cost;
        self.key = next;
        self.ciphers = ciphers;
        Ok(event)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::planner::PlanError;

    /// 16-bit blocks, 2-byte files, `eps_max = 2^-11`: CTR gives Q* = 3.
    pub(crate) fn toy_params() -> SecurityParams {
        SecurityParams::new(16, 16, Natural::one(), Rational::pow2(-11)).unwrap()
    }

    pub(crate) fn toy_session(keys: usize) -> Session {
        let pool = Arc::new(KeyPool::simulated(3, keys, 128).unwrap());
        open_session(pool, Mode::Ctr, &toy_params(), &Natural::from(2u64)).unwrap()
    }

    #[test]
    fn toy_plan_has_q_star_three() {
        assert_eq!(toy_session(1).state().plan().q_star, Natural::from(3u64));
    }

    #[test]
    fn seven_files_use_three_keys() {
        let mut s = toy_session(10);
        let mut rotated_before = Vec::new();
        for i in 1..=7u64 {
            if s.encrypt_file(&[i as u8, 0]).unwrap().1.is_some() {
                rotated_before.push(i);
            }
        }
        assert_eq!(rotated_before, vec![4, 7]);
        assert_eq!(s.state().keys_consumed(), 3);
        assert_eq!(s.state().rotations(), 2);
        assert_eq!(s.state().events()[1], RotationEvent { event_index: 1, old_key_id: 2, new_key_id: 3, at_file_count: 6 });
        s.state().check_invariants().unwrap();
    }

    #[test]
    fn exact_fill_does_not_rotate() {
        let mut s = toy_session(10);
        for _ in 0..3 {
            assert!(s.encrypt_file(b"ab").unwrap().1.is_none());
        }
        assert_eq!(s.state().keys_consumed(), 1);
        assert_eq!(s.pool().remaining(), 9);
    }

    #[test]
    fn exhaustion_closes_session() {
        let pool = Arc::new(KeyPool::simulated(1, 1, 128).unwrap());
        let params = toy_params().with_eps_max(Rational::pow2(-14)).unwrap();
        let mut s = open_session(pool, Mode::Ctr, &params, &Natural::from(2u64)).unwrap();
        assert_eq!(s.state().plan().q_star, Natural::one());
        s.encrypt_file(b"xy").unwrap();
        assert!(matches!(s.encrypt_file(b"xy"), Err(RotationError::PoolExhausted)));
        assert!(s.state().is_closed());
        assert_eq!(s.state().total_files(), 1);
        assert!(matches!(s.encrypt_file(b"xy"), Err(RotationError::SessionClosed)));
    }

    #[test]
    fn open_errors() {
        let empty = Arc::new(KeyPool::simulated(1, 0, 128).unwrap());
        assert!(matches!(
            open_session(empty, Mode::Ctr, &toy_params(), &Natural::from(2u64)),
            Err(RotationError::PoolExhausted)
        ));
        let pool = Arc::new(KeyPool::simulated(1, 1, 128).unwrap());
        let infeasible = toy_params().with_eps_max(Rational::pow2(-40)).unwrap();
        assert!(matches!(
            open_session(pool.clone(), Mode::Ctr, &infeasible, &Natural::from(2u64)),
            Err(RotationError::Plan(PlanError::Infeasible { .. }))
        ));
        assert!(matches!(
            open_session_with_factor(pool, Mode::Ctr, &toy_params(), &Natural::from(2u64), 4),
            Err(RotationError::InvalidFactor(4))
        ));
    }

    #[test]
    fn sm4_scale_single_key_session() {
        let pool = Arc::new(KeyPool::simulated(9, 1, 128).unwrap());
        let ex = crate::reference::Sm4Example::default();
        let s = open_session(pool, Mode::Ctr, &ex.params(), &ex.file_size_bytes()).unwrap();
        assert_eq!(s.state().plan().q_star, Natural::from(1_210_759u64));
        assert_eq!(s.state().files_under_current_key(), 0);
    }

    #[test]
    fn oversized_file_rejected_without_side_effects() {
        let mut s = toy_session(2);
        assert!(matches!(s.encrypt_file(b"abc"), Err(RotationError::OversizedFile { size: 3, .. })));
        assert_eq!(s.state().total_files(), 0);
        s.encrypt_file(b"a").unwrap();
    }

    #[test]
    fn sealed_files_open_in_every_mode() {
        for mode in Mode::ALL {
            let pool = Arc::new(KeyPool::simulated(4, 4, 256).unwrap());
            let params = SecurityParams::new(16, 16, Natural::from(8u64), Rational::pow2(-6)).unwrap();
            let mut s = open_session(pool, mode, &params, &Natural::from(16u64)).unwrap();
            for msg in [&b""[..], b"a", b"hello", b"sixteen bytes!!!"] {
                let (sealed, _) = s.encrypt_file(msg).unwrap();
                assert_eq!(open_sealed(mode, s.current_key(), &sealed).unwrap(), msg, "{mode:?}");
                if mode != Mode::EcbcMac && !msg.is_empty() {
                    assert_ne!(sealed.body, msg);
                }
            }
        }
    }

    #[test]
    fn uniform_rotation_factor_shrinks_interval() {
        let pool = Arc::new(KeyPool::simulated(1, 100, 128).unwrap());
        let params = SecurityParams::new(16, 16, Natural::one(), Rational::pow2(-8)).unwrap();
        let mut s = open_session_with_factor(pool, Mode::Ctr, &params, &Natural::from(2u64), 3).unwrap();
        let q = s.state().plan().q_star.to_u64().unwrap();
        assert_eq!(s.state().interval(), Natural::from(q / 3));
        for _ in 0..q {
            s.encrypt_file(b"zz").unwrap();
        }
        assert!(s.state().rotations() >= 2);
        s.state().check_invariants().unwrap();
    }

    #[test]
    fn total_cost_tracks_keys() {
        let pool = Arc::new(KeyPool::simulated(1, 10, 128).unwrap().with_key_cost(Rational::from(5u64)));
        let mut s = open_session(pool, Mode::Cbc, &toy_params(), &Natural::from(2u64)).unwrap();
        for _ in 0..8 {
            s.encrypt_file(b"..").unwrap();
        }
        assert_eq!(s.state().total_cost(), &Rational::from(5 * s.state().keys_consumed()));
    }
}
