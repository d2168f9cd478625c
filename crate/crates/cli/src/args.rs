use std::path::PathBuf;

use amco::bandit::theory_delta;
use amco::{BanditConfig, Replacement, SigmaMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::UsageError;

#[derive(Parser, Debug)]
#[command(
    name = "amco",
    version,
    about = "Adaptive Monte Carlo optimization runs and reports"
)]
pub struct Cli {
    /// Worker threads for per-point races (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// k-nearest-neighbor graph.
    Knn(KnnArgs),
    /// Lloyd's k-means with raced assignment steps.
    Kmeans(KmeansArgs),
    /// Medoid of a point set.
    Medoid(MedoidArgs),
    /// Average-linkage hierarchical clustering.
    Hier(HierArgs),
    /// Feature with maximum mutual information with a target.
    Mmi(MmiArgs),
    /// Gain over a grid of dimensions (knn) or sample sizes (mmi).
    Gaincurve(GainArgs),
    /// Write a synthetic data set.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaArg {
    PerArm,
    Global,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplacementArg {
    With,
    Without,
}

/// Race settings shared by every application.
#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Per-interval failure probability.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Use delta = 2 / (n^3 d) instead of --delta.
    #[arg(long)]
    pub theory_delta: bool,
    /// Relative tolerance of the approximate stopping rule; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SigmaArg::PerArm)]
    pub sigma_mode: SigmaArg,
    /// Noise scale for --sigma-mode fixed.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Warm-up pulls per arm (default: max(2, ceil(log2 arms))).
    #[arg(long)]
    pub warmup: Option<u32>,
    #[arg(long, value_enum, default_value_t = ReplacementArg::With)]
    pub replacement: ReplacementArg,
    /// Also run the exact computation and report accuracy.
    #[arg(long)]
    pub oracle: bool,
    /// Report path (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

impl RunArgs {
    /// Engine configuration for a problem with `n` points in `d` dimensions.
    pub fn config(&self, n: usize, d: usize) -> Result<BanditConfig, UsageError> {
        let sigma_mode = match (self.sigma_mode, self.sigma) {
            (SigmaArg::Fixed, Some(s)) => SigmaMode::Fixed(s),
            (SigmaArg::Fixed, None) => {
                return Err(UsageError("--sigma-mode fixed needs --sigma".into()))
            }
            (_, Some(_)) => return Err(UsageError("--sigma needs --sigma-mode fixed".into())),
            (SigmaArg::PerArm, None) => SigmaMode::PerArm,
            (SigmaArg::Global, None) => SigmaMode::Global,
        };
        let delta = if self.theory_delta {
            theory_delta(n, d)
        } else {
            self.delta
        };
        let mut cfg = BanditConfig::default()
            .with_delta(delta)
            .with_epsilon(self.epsilon)
            .with_seed(self.seed)
            .with_sigma_mode(sigma_mode)
            .with_replacement(match self.replacement {
                ReplacementArg::With => Replacement::With,
                ReplacementArg::Without => Replacement::Without,
            });
        if let Some(w) = self.warmup {
            cfg = cfg.with_warmup(w);
        }
        cfg.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// Gaussian clusters.
    Blobs,
    /// Points near a low-dimensional subspace.
    Latent,
    /// Two-level clusters.
    Nested,
    /// Sparse clusters (knn only).
    SparseBlobs,
}

/// Input data: a dense CSV file, or a synthetic fixture when no file is given.
#[derive(Args, Debug, Clone, Serialize)]
pub struct DataArgs {
    /// Dense comma-separated input, one point per row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Fixture::Blobs)]
    pub fixture: Fixture,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub d: usize,
    #[arg(long, default_value_t = 10)]
    pub centers: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.5)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Fraction of nonzero entries for sparse fixtures.
    #[arg(long, default_value_t = 0.07)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub fixture_seed: u64,
}

#[derive(Args, Debug)]
pub struct KnnArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Sparse triplet input instead of --input.
    #[arg(long, conflicts_with = "input")]
    pub sparse: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Write the neighbor lists as CSV.
    #[arg(long)]
    pub neighbors_out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct KmeansArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub max_iters: usize,
    /// Write final labels, one per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    L1,
    L2sq,
    L2,
}

#[derive(Args, Debug)]
pub struct MedoidArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = MetricArg::L1)]
    pub metric: MetricArg,
    /// Sample one coordinate of one other point per pull.
    #[arg(long)]
    pub doubly: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct HierArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Start new arms from exact parent values when both are known.
    #[arg(long)]
    pub pooled_init: bool,
    /// Write the merge table as CSV.
    #[arg(long)]
    pub linkage_out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MmiDataArgs {
    /// Dense CSV with features and the target in one file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Target column of --input (default: last).
    #[arg(long)]
    pub target_column: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub d: usize,
    /// Feature the synthetic target is built from.
    #[arg(long, default_value_t = 0)]
    pub planted: usize,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Features made partially dependent on the target.
    #[arg(long, default_value_t = 0)]
    pub distractors: usize,
    #[arg(long, default_value_t = 0)]
    pub fixture_seed: u64,
}

#[derive(Args, Debug)]
pub struct MmiArgs {
    #[command(flatten)]
    pub data: MmiDataArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainApp {
    Knn,
    Mmi,
}

#[derive(Args, Debug, Serialize)]
pub struct GainArgs {
    #[arg(long, value_enum)]
    pub app: GainApp,
    /// Dimensions swept for knn.
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096")]
    pub dims: Vec<usize>,
    /// Sample sizes swept for mmi.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
    pub sizes: Vec<usize>,
    /// Points for knn.
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Features for mmi.
    #[arg(long, default_value_t = 50)]
    pub d: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Latent rank of the knn fixture.
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    /// Noise of the knn fixture.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Target noise of the mmi fixture.
    #[arg(long, default_value_t = 0.5)]
    pub target_noise: f64,
    #[arg(long, default_value_t = 0)]
    pub fixture_seed: u64,
    /// Write `x,gain,effective,brute` rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Blobs,
    Latent,
    Nested,
    GapGaussian,
    MmiPlanted,
    SparseBlobs,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub out: PathBuf,
    /// Write generating labels (or gaps for gap-gaussian), one per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub d: usize,
    #[arg(long, default_value_t = 10)]
    pub centers: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.5)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.07)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub planted: usize,
    #[arg(long, default_value_t = 0)]
    pub distractors: usize,
    /// Arm offsets for gap-gaussian.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
    pub offsets: Vec<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub base: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
