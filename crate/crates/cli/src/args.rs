use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qnnlab_core::Split;

#[derive(Debug, Parser)]
#[command(
    name = "qnnlab",
    version,
    about = "Noise studies of amplitude-encoded quantum classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance to uniform of a prepared state under growing random circuits.
    Degrade(DegradeArgs),
    /// Prepared-image reconstruction under device noise.
    Prep(PrepArgs),
    /// Noise-free classifier training.
    Train(TrainArgs),
    /// Accuracy grid of trained models under device noise.
    Eval(EvalArgs),
    /// Verifies run manifests and merges their tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DegradeArgs {
    #[arg(long)]
    pub device: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub depth_max: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// `image:<test index>`, `basis:<index>` or `uniform`.
    #[arg(long, default_value = "image:0")]
    pub input: String,
    #[arg(long, env = "QNNLAB_MNIST")]
    pub mnist: Option<PathBuf>,
    /// `paper-fig2` or a comma-separated depth list.
    #[arg(long)]
    pub checkpoints: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PrepArgs {
    #[arg(long = "device")]
    pub devices: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub image: usize,
    #[arg(long, env = "QNNLAB_MNIST")]
    pub mnist: PathBuf,
    /// Recorded only; the preparation is analytic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, env = "QNNLAB_MNIST")]
    pub mnist: PathBuf,
    #[arg(long, default_value = "0-1")]
    pub split: Split,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub layers: Vec<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Leading training samples kept; `0` keeps all.
    #[arg(long)]
    pub max_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long = "device")]
    pub devices: Vec<PathBuf>,
    #[arg(long, env = "QNNLAB_MNIST")]
    pub mnist: PathBuf,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Class-balanced test subset of about this size per split.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Multipliers applied to every device's noise.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub noise_scale: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    pub run_dir: PathBuf,
    /// Defaults to the run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
