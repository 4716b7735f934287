use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::session::{RotationEvent, SessionState};
use super::RotationError;
use crate::advmodel::{EcbcDenominator, Mode, SecurityParams};
use crate::exactmath::{Natural, Rational};
use crate::planner::compute_q_star;

pub const STATE_VERSION: u64 = 1;

/// Parameters as written to disk. Power-of-two magnitudes are stored as
/// exponents; anything else falls back to the exact value.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRecord {
    lambda_bits: u32,
    s_min_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_min: Option<Natural>,
    l: Natural,
    eps_max_log2: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps_max: Option<Rational>,
    ecbc_denominator: EcbcDenominator,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    version: u64,
    mode: Mode,
    params: ParamsRecord,
    q_star: Natural,
    file_size_bytes: Natural,
    rotation_factor: u64,
    current_key_id: u64,
    files_under_current_key: u64,
    total_files: u64,
    keys_consumed: u64,
    total_cost: Rational,
    closed: bool,
    events: Vec<RotationEvent>,
}

impl ParamsRecord {
    fn from_params(p: &SecurityParams) -> Self {
        let s_min_bits = p.s_min_bits();
        let eps_max_log2 = p.eps_max_log2();
        ParamsRecord {
            lambda_bits: p.lambda_bits(),
            s_min_bits,
            s_min: s_min_bits.is_none().then(|| p.s_min().clone()),
            l: p.blocks_per_file().clone(),
            eps_max_log2,
            eps_max: eps_max_log2.is_none().then(|| p.eps_max().clone()),
            ecbc_denominator: p.ecbc_denominator(),
        }
    }

    fn to_params(&self) -> Result<SecurityParams, RotationError> {
        let s_min = match (self.s_min_bits, &self.s_min) {
            (Some(b), None) => Natural::pow2(b),
            (None, Some(s)) => s.clone(),
            _ => return Err(RotationError::Corrupt("exactly one of s_min_bits and s_min must be set".into())),
        };
        let eps = match (self.eps_max_log2, &self.eps_max) {
            (Some(e), None) => Rational::pow2(e),
            (None, Some(e)) => e.clone(),
            _ => return Err(RotationError::Corrupt("exactly one of eps_max_log2 and eps_max must be set".into())),
        };
        SecurityParams::with_magnitudes(self.lambda_bits, s_min, self.l.clone(), eps)
            .map(|p| p.with_ecbc_denominator(self.ecbc_denominator))
            .map_err(|e| RotationError::Corrupt(e.to_string()))
    }
}

/// Writes the state as pretty JSON, via a temporary file and rename so a
/// crash never leaves a half-written state behind.
pub fn persist_state(state: &SessionState, path: impl AsRef<Path>) -> Result<(), RotationError> {
    let path = path.as_ref();
    let record = StateRecord {
        version: STATE_VERSION,
        mode: state.mode,
        params: ParamsRecord::from_params(&state.plan.params),
        q_star: state.plan.q_star.clone(),
        file_size_bytes: state.plan.file_size_bytes.clone(),
        rotation_factor: state.rotation_factor,
        current_key_id: state.current_key_id,
        files_under_current_key: state.files_under_current_key,
        total_files: state.total_files,
        keys_consumed: state.keys_consumed,
        total_cost: state.total_cost.clone(),
        closed: state.closed,
        events: state.events.clone(),
    };
    let mut json = serde_json::to_string_pretty(&record).expect("state serializes");
    json.push('\n');
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, json).map_err(|e| RotationError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| RotationError::io(path, e))
}

/// Reads a state file, recomputes its plan from the stored parameters and
/// rejects anything whose counters could not have come from a real session.
pub fn load_state(path: impl AsRef<Path>) -> Result<SessionState, RotationError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| RotationError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| RotationError::Corrupt(e.to_string()))?;
    let version = value.get("version").and_then(|v| v.as_u64());
    if version != Some(STATE_VERSION) {
        return Err(RotationError::SchemaMismatch { found: version, expected: STATE_VERSION });
    }
    let record: StateRecord = serde_json::from_value(value).map_err(|e| RotationError::Corrupt(e.to_string()))?;

    let params = record.params.to_params()?;
    let plan = compute_q_star(record.mode, &params, &record.file_size_bytes)?;
    if plan.q_star != record.q_star {
        return Err(RotationError::InvariantViolation(format!(
            "stored q_star {} does not match {} recomputed from the parameters",
            record.q_star, plan.q_star
        )));
    }
    let state = SessionState {
        mode: record.mode,
        plan,
        rotation_factor: record.rotation_factor,
        current_key_id: record.current_key_id,
        files_under_current_key: record.files_under_current_key,
        total_files: record.total_files,
        keys_consumed: record.keys_consumed,
        total_cost: record.total_cost,
        events: record.events,
        closed: record.closed,
    };
    state.check_invariants()?;
    Ok(state)
}

/// One JSON object per line, in event order.
pub fn export_events_jsonl<W: Write>(events: &[RotationEvent], mut out: W) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
