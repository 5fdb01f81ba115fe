use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

pub const MAX_EXPONENT_CAP: u32 = 4096;
pub const MAX_BITS_CAP: u64 = 1 << 20;
pub const M_MAX_CAP: u64 = 10_000;
pub const WORKERS_CAP: usize = 256;
/// Scans stay below 2^32 so every primality decision is exact.
pub const LIMIT_CAP: u64 = 1 << 32;
pub const RING_EXPONENT_CAP: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "primesquare",
    version,
    about = "Solve and classify p^x - q^y = n^2 over consecutive primes",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustive bounded search for one pair.
    Solve(SolveArgs),
    /// Classify every consecutive pair up to a limit.
    Scan(ScanArgs),
    /// Build residue certificates for one pair.
    Certify(CertifyArgs),
    /// Run the descent prover on one pair.
    Descent(PairArgs),
    /// Quadratic-ring powers and imaginary-part equations.
    Ring(RingArgs),
    /// Replay the (3,2), (5,3), (7,5) results and report errata.
    VerifyPaper(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub q: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, default_value_t = 64)]
    pub max_x: u32,
    #[arg(long, default_value_t = 64)]
    pub max_y: u32,
    #[arg(long, default_value_t = 4096)]
    pub max_bits: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub limit: u64,
    #[arg(long, default_value_t = 64)]
    pub max_x: u32,
    #[arg(long, default_value_t = 64)]
    pub max_y: u32,
    #[arg(long, default_value_t = 12)]
    pub m_max: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["modulus", "search_max_m"])))]
pub struct CertifyArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub modulus: Option<u64>,
    #[arg(long)]
    pub search_max_m: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("op").required(true).args(["pow", "solve_imag"])))]
pub struct RingArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = clap::builder::PossibleValuesParser::new(["-1", "-2"]))]
    pub d: String,
    /// Base element as `a,b` for a + b·sqrt(d).
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    #[arg(long)]
    pub pow: Option<u64>,
    #[arg(long, allow_hyphen_values = true, requires = "xmax")]
    pub solve_imag: Option<i64>,
    #[arg(long, requires = "solve_imag")]
    pub xmax: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 64)]
    pub max_x: u32,
    #[arg(long, default_value_t = 64)]
    pub max_y: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
