use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use keyrot_core::empirics::{estimate_collision_probability, TrialConfig};
use keyrot_core::planner::{benefit, blocks_per_file, compute_q_star, improvement_bits, sweep_k};
use keyrot_core::reference::Sm4Example;
use keyrot_core::rotation::{export_events_jsonl, ingest_keys, open_session_with_factor, persist_state};
use keyrot_core::{FixedDecimal, Natural, Rational, RotationError, SecurityParams, Session};
use serde_json::Value;

use crate::args::{
    BenefitArgs, Command, ImproveArgs, PlanArgs, RotateArgs, SecurityArgs, SimulateArgs, SweepArgs,
    ValidateArgs,
};
use crate::render::{Record, Rows};
use crate::units::{parse_file_size, parse_k_list};
use crate::validate::run_checks;
use crate::CliError;

pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Plan(a) => plan(a, out),
        Command::Improve(a) => improve(a, out),
        Command::Benefit(a) => cmd_benefit(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Validate(a) => validate(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Rotate(a) => rotate(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string()))
}

fn text(v: impl ToString) -> Value {
    Value::String(v.to_string())
}

pub fn security_params(a: &SecurityArgs) -> Result<SecurityParams, CliError> {
    let l = blocks_per_file(&a.file_size, a.block_bits)?;
    let eps = a.eps.clone().unwrap_or_else(|| Rational::pow2(-(a.target_bits as i64)));
    let params = SecurityParams::new(a.lambda_bits, a.s_min_bits, l, eps).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(params.with_ecbc_denominator(a.ecbc_denominator))
}

fn q_star_for(a: &SecurityArgs, params: &SecurityParams, given: Option<Natural>) -> Result<Natural, CliError> {
    match given {
        Some(q) => Ok(q),
        None => Ok(compute_q_star(a.mode, params, &a.file_size)?.q_star),
    }
}

fn plan(a: PlanArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = &a.security;
    let params = security_params(s)?;
    let plan = compute_q_star(s.mode, &params, &s.file_size)?;
    let vol = plan.data_volume();
    let record = Record::new()
        .field("mode", s.mode.as_str())
        .field("lambda_bits", s.lambda_bits)
        .field("s_min_bits", s.s_min_bits)
        .field("blocks_per_file", text(params.blocks_per_file()))
        .field("file_size_bytes", text(&plan.file_size_bytes))
        .field("eps_max", text(params.eps_max()))
        .field("q_star", text(&plan.q_star))
        .field("eps_at_q_star", text(&plan.eps_at_q_star))
        .field("worst_case_bits", text(&plan.worst_case_bits))
        .field("max_data_volume_bytes", text(&plan.max_data_volume_bytes))
        .field("max_data_volume_kb", text(vol.kib_decimal(3)))
        .field("max_data_volume_mb", text(vol.mib_decimal(3)));
    emit(out, &record.render(a.format))
}

fn improve(a: ImproveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = &a.security;
    let params = security_params(s)?;
    let q = q_star_for(s, &params, a.q_star)?;
    let r = improvement_bits(s.mode, &params, &q, &a.k)?;
    let record = Record::new()
        .field("mode", s.mode.as_str())
        .field("q_star", text(&q))
        .field("k", text(&r.k))
        .field("delta_bits", text(&r.delta_bits))
        .field("lower_log2k", text(&r.lower_bound_bits))
        .field("upper_2log2k", text(&r.upper_bound_bits))
        .field("closed_form_bits", text(&r.closed_form_bits))
        .field("direct_difference_bits", text(&r.direct_difference_bits))
        .field("strictly_bracketed", r.strictly_bracketed());
    emit(out, &record.render(a.format))
}

fn cmd_benefit(a: BenefitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = &a.security;
    let params = security_params(s)?;
    let q = q_star_for(s, &params, a.q_star)?;
    let r = benefit(s.mode, &params, &q, &a.k, &a.key_cost)?;
    let record = Record::new()
        .field("mode", s.mode.as_str())
        .field("q_star", text(&q))
        .field("k", text(&r.k))
        .field("key_cost", text(&r.key_cost))
        .field("delta_bits", text(&r.delta_bits))
        .field("benefit", text(&r.benefit));
    emit(out, &record.render(a.format))
}

pub const SWEEP_COLUMNS: [&str; 5] = ["k", "delta_bits", "lower_log2k", "upper_2log2k", "benefit"];

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ks = match (&a.k_list, a.k_powers) {
        (Some(list), _) => parse_k_list(list).map_err(CliError::Usage)?,
        (None, max) => (0..=max.unwrap_or(10)).map(|e| Natural::pow2(e as u64)).collect(),
    };
    let mut rows = Rows::new(&SWEEP_COLUMNS);
    if !ks.is_empty() {
        let s = &a.security;
        let params = security_params(s)?;
        let q = compute_q_star(s.mode, &params, &s.file_size)?.q_star;
        for r in sweep_k(s.mode, &params, &q, &ks, &a.key_cost)? {
            rows.push(vec![
                text(&r.k),
                text(&r.delta_bits),
                text(&r.lower_log2k),
                text(&r.upper_2log2k),
                text(&r.benefit),
            ]);
        }
    }
    emit(out, &rows.render(a.format))
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let d = Sm4Example::default();
    let file_size_bytes = match a.file_size {
        Some(n) => n.to_u64().ok_or_else(|| CliError::Usage("file size too large".into()))?,
        None => d.file_size_bytes,
    };
    let ex = Sm4Example {
        lambda_bits: a.lambda_bits.unwrap_or(d.lambda_bits),
        s_min_bits: a.s_min_bits.unwrap_or(d.s_min_bits),
        block_bits: a.block_bits.unwrap_or(d.block_bits),
        file_size_bytes,
        target_bits: a.target_bits.unwrap_or(d.target_bits),
    };
    if ex.block_bits == 0 || ex.block_bits % 8 != 0 || file_size_bytes == 0 {
        return Err(CliError::Usage("block bits must be a positive multiple of 8 and file size positive".into()));
    }
    if ex.lambda_bits == 0 || ex.s_min_bits == 0 || ex.target_bits == 0 {
        return Err(CliError::Usage("lambda, s-min-bits and target-bits must be positive".into()));
    }
    let checks = run_checks(&ex)?;
    let mut report = String::new();
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        report.push_str(&format!("{status}  {}: {} (expected {})\n", c.name, c.observed, c.expected));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    report.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    emit(out, &report)?;
    if passed == checks.len() {
        Ok(())
    } else {
        Err(CliError::ValidationFailed(checks.len() - passed))
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = TrialConfig {
        mode: a.mode,
        block_bits: a.block_bits,
        q_files: a.q,
        blocks_per_file: a.l,
        trials: a.trials,
        rng_seed: a.seed,
    };
    let r = estimate_collision_probability(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let respected = r.bound_respected();
    let record = Record::new()
        .field("mode", a.mode.as_str())
        .field("block_bits", a.block_bits)
        .field("q", a.q)
        .field("l", a.l)
        .field("trials", r.trials)
        .field("seed", a.seed)
        .field("collisions", r.collisions)
        .field("collision_fraction", text(format!("{:.6}", r.collision_fraction)))
        .field("half_width_99", text(format!("{:.6}", r.half_width_99)))
        .field("theoretical_bound", text(&r.theoretical_bound))
        .field("theoretical_bound_decimal", text(FixedDecimal::from_rational(&r.theoretical_bound, 6)))
        .field("bound_respected", respected);
    emit(out, &record.render(a.format))?;
    if respected {
        Ok(())
    } else {
        Err(CliError::BoundViolated)
    }
}

/// One manifest entry: a file name and its size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub size: u64,
}

/// `name,size` per line; blank lines and `#` comments are skipped.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: String| CliError::Failed(format!("{} line {}: {m}", path.display(), i + 1));
        let (name, size) = line.rsplit_once(',').ok_or_else(|| bad("expected name,size".into()))?;
        let size = parse_file_size(size).map_err(bad)?;
        let size = size.to_u64().ok_or_else(|| bad("size too large".into()))?;
        entries.push(ManifestEntry { name: name.trim().to_string(), size });
    }
    Ok(entries)
}

/// Deterministic filler so each file has real content to encrypt.
fn synthetic_contents(seed: u64, index: u64, size: u64) -> Vec<u8> {
    let mut x = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x2545_f491_4f6c_dd1d;
    (0..size)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x as u8
        })
        .collect()
}

fn rotation_summary(session: &Session, manifest_len: usize, status: &str, events: &Path) -> Record {
    let st = session.state();
    Record::new()
        .field("status", status)
        .field("mode", st.mode().as_str())
        .field("q_star", text(&st.plan().q_star))
        .field("interval", text(st.interval()))
        .field("files_in_manifest", manifest_len as u64)
        .field("files_processed", st.total_files())
        .field("keys_consumed", st.keys_consumed())
        .field("rotations", st.rotations())
        .field("total_cost", text(st.total_cost()))
        .field("keys_remaining", session.pool().remaining() as u64)
        .field("events", text(events.display()))
}

fn write_events(session: &Session, path: &Path) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Failed(format!("{}: {e}", path.display()));
    let file = File::create(path).map_err(fail)?;
    export_events_jsonl(session.state().events(), BufWriter::new(file)).map_err(fail)
}

fn rotate(a: RotateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let s = &a.security;
    let params = security_params(s)?;
    let manifest = read_manifest(&a.manifest)?;
    let limit = &s.file_size;
    if let Some(big) = manifest.iter().find(|e| &Natural::from(e.size) > limit) {
        return Err(CliError::Failed(format!(
            "file '{}' ({} bytes) exceeds the planned {limit}-byte file size",
            big.name, big.size
        )));
    }
    let pool = ingest_keys(&a.keys, a.key_len_bits)?.with_key_cost(a.key_cost.clone());
    let mut session = open_session_with_factor(Arc::new(pool), s.mode, &params, &s.file_size, a.k)?;

    let mut outcome = Ok(());
    for (i, entry) in manifest.iter().enumerate() {
        let contents = synthetic_contents(a.seed, i as u64, entry.size);
        match session.encrypt_file(&contents) {
            Ok(_) => {}
            Err(RotationError::PoolExhausted) => {
                outcome = Err(CliError::PoolExhausted(format!(
                    "key pool exhausted before file '{}' ({} of {})",
                    entry.name,
                    i + 1,
                    manifest.len()
                )));
                break;
            }
            Err(e) => {
                outcome = Err(CliError::Failed(format!("file '{}': {e}", entry.name)));
                break;
            }
        }
    }

    write_events(&session, &a.events)?;
    if let Some(state_path) = &a.state {
        persist_state(session.state(), state_path)?;
    }
    let status = if outcome.is_ok() { "complete" } else { "incomplete" };
    emit(out, &rotation_summary(&session, manifest.len(), status, &a.events).render(a.format))?;
    outcome
}
