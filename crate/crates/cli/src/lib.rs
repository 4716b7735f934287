//! The `keyrot` command line: planning, validation, simulation and rotation.

pub mod args;
pub mod commands;
pub mod render;
pub mod units;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use keyrot_core::{PlanError, RotationError};
use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BOUND_VIOLATED: i32 = 4;
pub const EXIT_POOL_EXHAUSTED: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("empirical collision rate exceeds the theoretical bound")]
    BoundViolated,
    #[error("{0}")]
    PoolExhausted(String),
    #[error("{0} validation check(s) failed")]
    ValidationFailed(usize),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::BoundViolated => EXIT_BOUND_VIOLATED,
            CliError::PoolExhausted(_) => EXIT_POOL_EXHAUSTED,
            CliError::ValidationFailed(_) | CliError::Failed(_) => EXIT_FAILURE,
        }
    }
}

fn is_infeasible(e: &PlanError) -> bool {
    match e {
        PlanError::Infeasible { .. } => true,
        PlanError::SweepRow { source, .. } => is_infeasible(source),
        _ => false,
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        if is_infeasible(&e) {
            CliError::Infeasible(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<RotationError> for CliError {
    fn from(e: RotationError) -> Self {
        match e {
            RotationError::Plan(p) => p.into(),
            RotationError::PoolExhausted => CliError::PoolExhausted(e.to_string()),
            RotationError::InvalidFactor(_) => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use keyrot_core::{Mode, Natural, Rational};

    #[test]
    fn errors_map_to_exit_codes() {
        let infeasible = PlanError::Infeasible { mode: Mode::Ctr, eps_max: Rational::one(), reason: "x".into() };
        assert_eq!(CliError::from(infeasible).exit_code(), EXIT_INFEASIBLE);
        assert_eq!(CliError::from(PlanError::ZeroFileSize).exit_code(), EXIT_USAGE);
        let sweep = PlanError::SweepRow {
            k: Natural::from(8u64),
            source: Box::new(PlanError::Infeasible { mode: Mode::Cbc, eps_max: Rational::one(), reason: "x".into() }),
        };
        assert_eq!(CliError::from(sweep).exit_code(), EXIT_INFEASIBLE);
        assert_eq!(CliError::from(RotationError::PoolExhausted).exit_code(), EXIT_POOL_EXHAUSTED);
        assert_eq!(CliError::from(RotationError::InvalidFactor(0)).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(RotationError::UnknownKey(3)).exit_code(), EXIT_FAILURE);
        assert_eq!(CliError::from(RotationError::Plan(PlanError::ZeroFileSize)).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::BoundViolated.exit_code(), EXIT_BOUND_VIOLATED);
        assert_eq!(CliError::ValidationFailed(2).exit_code(), EXIT_FAILURE);
    }

    #[test]
    fn run_reports_usage_errors() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["keyrot", "plan", "--lambda", "x"], &mut out, &mut err), EXIT_USAGE);
        assert!(!err.is_empty());
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["keyrot", "plan"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("1210759"));
    }
}
