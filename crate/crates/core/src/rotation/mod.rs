//! Key-lifecycle enforcement around a [`RotationPlan`](crate::planner::RotationPlan).
//!
//! A [`KeyPool`] hands out QKD keys in order. A [`Session`] binds one plan to
//! the pool, counts files per key and rotates lazily: the file that would push
//! the current key past its interval is the one that triggers the next key.
//! Session state persists as versioned JSON.

mod pool;
mod session;
mod state;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::empirics::EmpiricsError;
use crate::planner::PlanError;

pub use pool::{ingest_keys, KeyPool, KeyRecord, KeySource};
pub use session::{
    open_sealed, open_session, open_session_with_factor, RotationEvent, SealedFile, Session,
    SessionState, TOY_BLOCK_BITS,
};
pub use state::{export_events_jsonl, load_state, persist_state, STATE_VERSION};

#[derive(Debug, Error)]
pub enum RotationError {
    #[error("key length must be a positive multiple of 8 bits, got {0}")]
    InvalidKeyLength(u32),
    #[error("line {line}: {reason}")]
    MalformedKey { line: usize, reason: String },
    #[error("no such file: {}", .0.display())]
    NotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("key pool exhausted")]
    PoolExhausted,
    #[error("key {0} is not available in the pool")]
    UnknownKey(u64),
    #[error("session is closed")]
    SessionClosed,
    #[error("file of {size} bytes exceeds the planned {limit}-byte bound")]
    OversizedFile { size: u64, limit: String },
    #[error("rotation factor must satisfy 1 <= k <= Q*, got {0}")]
    InvalidFactor(u64),
    #[error("unsupported state file version {found:?}, expected {expected}")]
    SchemaMismatch { found: Option<u64>, expected: u64 },
    #[error("corrupt state file: {0}")]
    Corrupt(String),
    #[error("state invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Cipher(#[from] EmpiricsError),
}

impl RotationError {
    fn io(path: &Path, source: io::Error) -> Self {
        if source.kind() == io::ErrorKind::NotFound {
            RotationError::NotFound(path.to_path_buf())
        } else {
            RotationError::Io { path: path.to_path_buf(), source }
        }
    }
}
