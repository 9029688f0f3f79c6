//! Command-line harness: degradation sweeps, prepared-image reconstruction,
//! training and noisy evaluation, each leaving CSV tables and a manifest.

pub mod args;
pub mod artifacts;
mod degrade;
mod eval;
mod prep;
mod report;
mod train;

use std::path::Path;

use anyhow::{Context, Result};

use args::{Cli, Command};
use artifacts::RunRecorder;
use qnnlab_core::dataset::{mnist_files, pool_sample};
use qnnlab_core::{encode_amplitudes, load_mnist_dir, EncodedSample, MnistPart, RawSample};

pub use report::{verify_run_dir, IntegrityError};

pub const THREADS_ENV: &str = "QNNLAB_THREADS";

/// Sizes the global worker pool from `QNNLAB_THREADS` when set.
pub fn init_thread_pool() -> Result<()> {
    let Some(value) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .to_str()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Degrade(a) => degrade::run(&a),
        Command::Prep(a) => prep::run(&a),
        Command::Train(a) => train::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Report(a) => report::run(&a),
    }
}

/// Loads one MNIST half and records both files as run inputs.
fn load_mnist(dir: &Path, part: MnistPart, rec: &mut RunRecorder) -> Result<Vec<RawSample>> {
    let (images, labels) = mnist_files(dir, part)?;
    rec.add_input(&images)?;
    rec.add_input(&labels)?;
    Ok(load_mnist_dir(dir, part)?)
}

fn encoded_test_image(dir: &Path, index: usize, rec: &mut RunRecorder) -> Result<EncodedSample> {
    let raw = load_mnist(dir, MnistPart::Test, rec)?;
    let sample = raw
        .get(index)
        .with_context(|| format!("image index {index} is out of range for {} test images", raw.len()))?;
    Ok(encode_amplitudes(&pool_sample(sample)?)?)
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
