use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "treelet",
    version,
    about = "Treelet transform, baselines and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a treelet basis; writes basis.json, dendrogram.json, dendrogram.nwk.
    Fit(FitArgs),
    /// Transform rows with a fitted basis; writes coefficients.csv.
    Transform(TransformArgs),
    /// Generate synthetic data from a JSON spec; writes data.csv and
    /// data.labels.json.
    Simulate(SimulateArgs),
    /// Run treelet, PCA and HC on labelled data; writes compare.json,
    /// energy.csv and timing.json.
    Compare(CompareArgs),
    /// Nearest-centroid cross-validation on treelet features; writes cv.json
    /// and cv_folds.csv.
    Cv(CvArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Cov,
    Abscorr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RetentionArg {
    Maxvar,
    Lowindex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Clean,
    Leaky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreArg {
    Separation,
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageArg {
    Average,
    Complete,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory for output artifacts (created if missing).
    #[arg(long, short = 'o')]
    pub output_dir: PathBuf,
    /// Random seed; falls back to $TREELET_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for repeated runs. Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

/// Ingest options for commands that read a CSV matrix.
#[derive(Debug, Clone, Args)]
pub struct Ingest {
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Apply the natural-log transform on ingest (required for raw-scale data).
    #[arg(long)]
    pub log: bool,
    /// Subtract each row's mean over variables after ingest.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TreeletArgs {
    #[arg(long, value_enum, default_value_t = MetricArg::Cov)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = RetentionArg::Maxvar)]
    pub retention: RetentionArg,
    /// Number of merge levels; defaults to p - 1 (full tree).
    #[arg(long)]
    pub level: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub ingest: Ingest,
    #[command(flatten)]
    pub treelet: TreeletArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub ingest: Ingest,
    /// basis.json written by `fit`.
    #[arg(long)]
    pub basis: PathBuf,
    /// Level to transform to; defaults to the basis's top level.
    #[arg(long)]
    pub level: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON spec: {"model": "block" | "global_factor" | "driver_modulator", ...}.
    #[arg(long)]
    pub spec: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub ingest: Ingest,
    /// Ground-truth block label per variable (JSON array, or a labels
    /// sidecar written by `simulate`).
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub treelet: TreeletArgs,
    #[arg(long, value_enum, default_value_t = LinkageArg::Average)]
    pub linkage: LinkageArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub ingest: Ingest,
    /// Binary class label per row (JSON array of 0/1 or {"labels": [...]}).
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub treelet: TreeletArgs,
    /// Number of selected features.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Clean)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ScoreArg::Separation)]
    pub score: ScoreArg,
    /// Repetitions with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Shuffle the labels in every repetition (null distribution).
    #[arg(long)]
    pub permute_labels: bool,
    #[command(flatten)]
    pub common: Common,
}
