use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use keyrot_core::{EcbcDenominator, Mode, Natural, Rational};

use crate::units::{parse_file_size, parse_rational};

#[derive(Debug, Parser)]
#[command(name = "keyrot", version, about = "Plan and enforce QKD key-rotation intervals for block-cipher modes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the rotation interval Q* and the data volume one key may cover.
    Plan(PlanArgs),
    /// Security gain of rotating k times within Q*.
    Improve(ImproveArgs),
    /// Per-cost benefit of rotating k times within Q*.
    Benefit(BenefitArgs),
    /// Improvement and benefit over a list of k values.
    Sweep(SweepArgs),
    /// Check the SM4 worked example against its reference values.
    Validate(ValidateArgs),
    /// Monte Carlo collision estimate on a toy cipher.
    Simulate(SimulateArgs),
    /// Run the rotation engine over a manifest of files.
    Rotate(RotateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::from_str(s).map_err(|e| e.to_string())
}

fn parse_denominator(s: &str) -> Result<EcbcDenominator, String> {
    EcbcDenominator::from_str(s).map_err(|e| e.to_string())
}

fn parse_natural(s: &str) -> Result<Natural, String> {
    Natural::from_str(s.trim()).map_err(|e| e.to_string())
}

/// Inputs shared by every planning command. Defaults are the SM4 example.
#[derive(Clone, Debug, Args)]
pub struct SecurityArgs {
    /// ctr, cbc or ecbc-mac
    #[arg(long, default_value = "ctr", value_parser = parse_mode)]
    pub mode: Mode,
    /// Cipher block length in bits; the permutation domain is 2^lambda.
    #[arg(long = "lambda", default_value_t = 128)]
    pub lambda_bits: u32,
    /// Average cryptanalytic strength of the cipher, log2(s_min).
    #[arg(long, default_value_t = 121)]
    pub s_min_bits: u32,
    /// Block size used to count blocks per file.
    #[arg(long, default_value_t = 128)]
    pub block_bits: u64,
    /// Maximum file size, e.g. 1536, 1.5KB, 2MB (1024-based).
    #[arg(long, default_value = "1.5KB", value_parser = parse_file_size)]
    pub file_size: Natural,
    /// Target security level; eps_max = 2^-target_bits.
    #[arg(long, default_value_t = 80)]
    pub target_bits: u32,
    /// Exact eps_max as p/q, overriding --target-bits.
    #[arg(long, value_parser = parse_rational, conflicts_with = "target_bits")]
    pub eps: Option<Rational>,
    /// ECBC-MAC collision denominator: 2n or n.
    #[arg(long, default_value = "2n", value_parser = parse_denominator)]
    pub ecbc_denominator: EcbcDenominator,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub security: SecurityArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ImproveArgs {
    #[command(flatten)]
    pub security: SecurityArgs,
    /// Number of keys sharing the Q* files.
    #[arg(long, default_value = "2", value_parser = parse_natural)]
    pub k: Natural,
    /// Evaluate at this file count instead of the computed Q*.
    #[arg(long, value_parser = parse_natural)]
    pub q_star: Option<Natural>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenefitArgs {
    #[command(flatten)]
    pub security: SecurityArgs,
    #[arg(long, default_value = "2", value_parser = parse_natural)]
    pub k: Natural,
    /// Cost of one quantum key, as an integer, decimal or p/q.
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    pub key_cost: Rational,
    #[arg(long, value_parser = parse_natural)]
    pub q_star: Option<Natural>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub security: SecurityArgs,
    /// Comma-separated k values; an empty list prints only the header.
    #[arg(long = "k", conflicts_with = "k_powers")]
    pub k_list: Option<String>,
    /// Sweep k = 2^0 .. 2^N (default N = 10).
    #[arg(long)]
    pub k_powers: Option<u32>,
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    pub key_cost: Rational,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Every field overrides one input of the worked example.
#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "lambda")]
    pub lambda_bits: Option<u32>,
    #[arg(long)]
    pub s_min_bits: Option<u32>,
    #[arg(long)]
    pub block_bits: Option<u32>,
    #[arg(long, value_parser = parse_file_size)]
    pub file_size: Option<Natural>,
    #[arg(long)]
    pub target_bits: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// ctr or cbc
    #[arg(long, default_value = "ctr", value_parser = parse_mode)]
    pub mode: Mode,
    /// Toy block width, 8 to 24 bits.
    #[arg(long, default_value_t = 16)]
    pub block_bits: u32,
    /// Files per trial.
    #[arg(long)]
    pub q: u64,
    /// Blocks per file.
    #[arg(long)]
    pub l: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[command(flatten)]
    pub security: SecurityArgs,
    /// Hex key file, one key per line.
    #[arg(long)]
    pub keys: PathBuf,
    /// Manifest of `name,size` lines.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the JSON-lines rotation log.
    #[arg(long)]
    pub events: PathBuf,
    /// Optionally persist the final session state here.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub key_len_bits: u32,
    #[arg(long, default_value = "1", value_parser = parse_rational)]
    pub key_cost: Rational,
    /// Rotate k times as often as Q* allows.
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    /// Seed for the synthetic file contents.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}
