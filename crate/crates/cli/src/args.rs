use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ggm", version, about = "Generalized Gaussian entropy-model experiments")]
pub struct Cli {
    /// Worker threads; overrides the GGM_THREADS environment variable.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Noisy vs rounded rate over a (beta, alpha) grid, as CSV.
    MismatchGrid(MismatchArgs),
    /// Scale lower bound as a function of shape, as CSV.
    BoundCurve(BoundArgs),
    /// GM vs GGM rate-distortion curves on a 2-D toy source.
    RdSim(RdArgs),
    /// Build and save a LUT grid of CDF tables.
    Lut(LutArgs),
    /// Encode or decode a symbol stream with a LUT grid.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Fit a GGM to samples.
    Fit(FitArgs),
}

/// `lo,hi` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range(pub f64, pub f64);

fn parse_range(s: &str) -> Result<Range, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("range needs finite LO <= HI, got {lo},{hi}"));
    }
    Ok(Range(lo, hi))
}

#[derive(Debug, Args)]
pub struct MismatchArgs {
    #[arg(long, value_parser = parse_range, default_value = "0.5,4")]
    pub beta_range: Range,
    #[arg(long, default_value_t = 30)]
    pub beta_count: usize,
    /// Log-spaced.
    #[arg(long, value_parser = parse_range, default_value = "0.01,60")]
    pub alpha_range: Range,
    #[arg(long, default_value_t = 30)]
    pub alpha_count: usize,
    /// Comma-separated locations.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5", allow_hyphen_values = true)]
    pub mu: Vec<f64>,
    /// Use zero-center rounding instead of rounding to the integer grid.
    #[arg(long)]
    pub zero_center: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_parser = parse_range, default_value = "0.5,4")]
    pub beta_range: Range,
    #[arg(long, default_value_t = 64)]
    pub count: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceName {
    X1,
    X2,
    X3,
}

#[derive(Debug, Args)]
pub struct RdArgs {
    #[arg(long, conflicts_with = "spec_file", required_unless_present = "spec_file")]
    pub source: Option<SourceName>,
    /// JSON source description: {"base_cov": [[..],[..]], "components": [{"weight", "cov_scale"}]}.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    #[arg(long, default_value_t = ggm_core::sim::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Number of log-spaced quantizer steps.
    #[arg(long, default_value_t = ggm_core::sim::DEFAULT_STEP_COUNT)]
    pub steps: usize,
    #[arg(long, value_parser = parse_range, default_value = "0.04,4")]
    pub step_range: Range,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// CSV of both curves (model, rate, mse, quality).
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// JSON summary; printed to stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LutArgs {
    #[arg(long, default_value_t = ggm_core::lut::DEFAULT_BETA_COUNT)]
    pub beta_samples: usize,
    #[arg(long, default_value_t = ggm_core::lut::DEFAULT_ALPHA_COUNT)]
    pub alpha_samples: usize,
    #[arg(long, value_parser = parse_range, default_value = "0.5,3")]
    pub beta_range: Range,
    #[arg(long, value_parser = parse_range, default_value = "0.01,60")]
    pub alpha_range: Range,
    /// Build tables from the raw scales instead of the bounded ones.
    #[arg(long)]
    pub no_bound: bool,
    #[arg(long)]
    pub grid_out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum CodecCommand {
    Encode(EncodeArgs),
    Decode(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub grid: PathBuf,
    /// CSV with header mu,alpha,beta; one row per symbol.
    #[arg(long)]
    pub params_file: PathBuf,
    /// One integer residual per line.
    #[arg(long)]
    pub symbols: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub params_file: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Decoded symbols; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FitMode {
    /// Discrete average-bits search over a (beta, alpha) lattice; integer samples.
    Grid,
    /// Maximum likelihood on real samples.
    Mle,
    /// Maximum likelihood scored by histogram r².
    R2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MuChoice {
    Zero,
    Mean,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// One sample per line.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, value_enum, default_value = "mle")]
    pub mode: FitMode,
    #[arg(long, value_enum, default_value = "zero")]
    pub mu_mode: MuChoice,
    /// Histogram bins for r²; Freedman–Diaconis when absent.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, default_value_t = 36)]
    pub beta_count: usize,
    #[arg(long, value_parser = parse_range, default_value = "0.5,4")]
    pub beta_range: Range,
    #[arg(long, default_value_t = 48)]
    pub alpha_count: usize,
    #[arg(long, value_parser = parse_range, default_value = "0.05,30")]
    pub alpha_range: Range,
    /// Full average-bits lattice as CSV (grid mode).
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    /// Fit result JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
