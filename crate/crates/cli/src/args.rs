use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "unitroot", version, about = "Exact p-adic checks for unit-root L-functions of sigma-modules")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    #[command(flatten)]
    Task(Task),
}

/// One experiment. The JSON form carries the subcommand name under "command".
#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    /// Euler-product L-function of a sigma-module.
    EulerL(EulerArgs),
    /// Euler product against the alternating Fredholm quotient.
    TraceFormula(EulerArgs),
    /// Rank-one resolution of a twisted unit-root L-function.
    Rk1res(Rk1resArgs),
    /// Fibre of the limiting module against its U-series at iota(y).
    FibreCommute(FibreArgs),
    /// Evaluate a weight-space character at a unit.
    WeightEval(WeightArgs),
    /// Two-variable L-series at U = iota(y) against the twisted L-function.
    TwoVariableL(TwoVariableArgs),
    /// Kloosterman sums, L-polynomials, slopes and unit roots.
    Kloosterman(KloostermanArgs),
    /// Valuation bound on the coefficients of exp(-sum g_m T^m / m).
    ConvextCheck(ConvextArgs),
    /// Orthonormal-basis normalization of the matrix entries in |.|_c.
    NormCheck(NormArgs),
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct Source {
    /// Name of a shipped example matrix.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Path to a matrix descriptor file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<u64>,
    /// Working precision in pi-digits.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EulerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    /// T-adic truncation degree.
    #[arg(long = "DT")]
    #[serde(rename = "DT")]
    pub dt: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Rk1resArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<i64>,
    /// Exponent y, an integer or a fraction a/b with b prime to p.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    /// Total degree bound of the limiting index set.
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    #[arg(long = "DT")]
    #[serde(rename = "DT")]
    pub dt: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FibreArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long, value_enum)]
    pub sign: Option<SignArg>,
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    /// Largest closed-point degree to check.
    #[arg(long)]
    pub degree: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct CharacterArgs {
    /// Integer weight k; excludes --s/--t/--z.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["s", "t", "z"])]
    pub weight: Option<i64>,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub t: Option<u64>,
    /// Disk coordinate z, an integer or fraction of positive valuation.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WeightArgs {
    #[arg(long)]
    pub p: Option<u64>,
    /// Residue degree of the unramified base.
    #[arg(long)]
    pub f: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub character: CharacterArgs,
    /// The unit at which to evaluate, integer or fraction.
    #[arg(long = "at", allow_hyphen_values = true)]
    #[serde(rename = "at")]
    pub at: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TwoVariableArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long = "DT")]
    #[serde(rename = "DT")]
    pub dt: Option<usize>,
    /// U-adic truncation degree.
    #[arg(long = "DU")]
    #[serde(rename = "DU")]
    pub du: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KloostermanArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Digits of precision in Z_p.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub digits: Option<u32>,
    /// Largest degree of the points y.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long = "m-max")]
    #[serde(rename = "m-max")]
    pub m_max: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub character: CharacterArgs,
    #[arg(long = "DT")]
    #[serde(rename = "DT")]
    pub dt: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ConvextArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    #[arg(long)]
    pub s: Option<u64>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long = "m-max")]
    #[serde(rename = "m-max")]
    pub m_max: Option<usize>,
    #[arg(long = "DU")]
    #[serde(rename = "DU")]
    pub du: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct NormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: Source,
    /// Norm index; defaults to one more than the largest entry degree.
    #[arg(long)]
    pub c: Option<u32>,
    /// Largest shift exponent |alpha| to sample.
    #[arg(long)]
    pub alpha: Option<usize>,
}

/// JSON experiment config: a task plus an optional output path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub task: Task,
    pub out: Option<PathBuf>,
}
