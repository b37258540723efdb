use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infband::counting::DistanceMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "infband", version, about = "Exact moments, free convolutions and Monte Carlo runs for periodically banded GUE matrices")]
pub struct Cli {
    /// Worker threads (default: all available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// List the pair partitions of [2ℓ] with their genus and graph data.
    Partitions(PartitionsArgs),
    /// Exact E[Tr Ξ^{2ℓ}], its Catalan term and the correction.
    Moments(MomentsArgs),
    /// Limit correction m_{2ℓ}(σ², c) by Monte Carlo integration.
    Limit(LimitArgs),
    /// Monte Carlo of the top eigenvalue of a deformed banded GUE matrix.
    Simulate(SimulateArgs),
    /// Free additive convolution of two probability measures.
    Convolve(ConvolveArgs),
    /// Type B law of a semicircle with finite-rank spikes.
    Typeb(TypebArgs),
    /// Re-run the invocation recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TableOutput {
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PartitionsArgs {
    #[arg(long)]
    pub ell: usize,
    /// Keep only partitions of this genus.
    #[arg(long)]
    pub genus: Option<usize>,
    /// Keep only non-crossing partitions.
    #[arg(long)]
    pub noncrossing: bool,
    /// Largest ℓ accepted for exhaustive enumeration.
    #[arg(long, default_value_t = infband::combinat::DEFAULT_CAP)]
    pub cap: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MomentsArgs {
    /// One or more half-orders ℓ, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ell: Vec<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long)]
    pub b: usize,
    #[arg(long, default_value_t = DistanceMode::Periodic)]
    pub mode: DistanceMode,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LimitArgs {
    #[arg(long)]
    pub ell: usize,
    /// Band ratio c in b ~ c√N.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Monte Carlo samples per genus-one partition.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: TableOutput,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long = "N", default_value_t = 1296)]
    #[serde(rename = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 648)]
    pub b: usize,
    #[arg(long, default_value_t = DistanceMode::Periodic)]
    pub mode: DistanceMode,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Spike strength θ, added at entry (1, 1) unless --delocalized is set.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Use the delocalized deformation (θ/N)·J_N instead of θ·E^{(1,1)}.
    #[arg(long)]
    pub delocalized: bool,
    /// Normalisation of the F statistic: 1 uses √ξ, 2 uses √N.
    #[arg(long, default_value_t = 1)]
    pub kind: u8,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub hist_lo: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub hist_hi: f64,
    /// Output directory.
    #[arg(long, default_value = "infband-simulate")]
    pub out: PathBuf,
    /// Format of the realization and histogram tables.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub grid_lo: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub grid_hi: f64,
    #[arg(long, default_value_t = 600)]
    pub grid_n: usize,
    /// Largest height of the inversion ladder {η, η/2, η/4}.
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConvolveArgs {
    /// First measure: semicircle:σ, rademacher or atoms:loc/weight,…
    #[arg(long)]
    pub mu1: String,
    #[arg(long)]
    pub mu2: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Output prefix for PREFIX.density.csv, PREFIX.atoms.json and PREFIX.manifest.json.
    #[arg(long, default_value = "infband-convolve")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TypebArgs {
    /// Base distribution; a semicircle also gets the closed-form comparison.
    #[arg(long, default_value = "semicircle:1")]
    pub mu: String,
    /// Infinitesimal part of the base: zero, wigner-nu:β,σ²,s²,α or atoms:…
    #[arg(long, default_value = "zero")]
    pub nu: String,
    /// Diagonal spike strengths, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// Strength of an additional delocalized spike (θ/N)·J_N.
    #[arg(long, allow_hyphen_values = true)]
    pub delocalized: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "infband-typeb")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// A manifest.json written by an earlier run.
    pub manifest: PathBuf,
    /// Override the recorded output location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Partitions(_) => "partitions",
            Command::Moments(_) => "moments",
            Command::Limit(_) => "limit",
            Command::Simulate(_) => "simulate",
            Command::Convolve(_) => "convolve",
            Command::Typeb(_) => "typeb",
            Command::Rerun(_) => "rerun",
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Partitions(a) => a.output.out = Some(out),
            Command::Moments(a) => a.output.out = Some(out),
            Command::Limit(a) => a.output.out = Some(out),
            Command::Simulate(a) => a.out = out,
            Command::Convolve(a) => a.out = out,
            Command::Typeb(a) => a.out = out,
            Command::Rerun(a) => a.out = Some(out),
        }
    }
}
