use anyhow::{bail, Result};
use serde::Serialize;

use crate::args::TrainArgs;
use crate::artifacts::{csv_bytes, serialize_rows, RunRecorder};
use crate::load_mnist;
use qnnlab_core::training::accuracy;
use qnnlab_core::{encode_all, filter_split, train, MnistPart, Split, TrainConfig, TrainingLog};

#[derive(Serialize)]
struct SummaryRow {
    split: Split,
    layers: usize,
    epochs: usize,
    learning_rate: f64,
    batch_size: usize,
    train_samples: usize,
    steps: usize,
    final_batch_loss: f64,
    test_samples: usize,
    test_accuracy: f64,
}

pub fn model_file_name(split: Split, layers: usize) -> String {
    format!("model-{split}-L{layers}.json")
}

fn config_for(args: &TrainArgs, layers: usize) -> TrainConfig {
    let mut c = TrainConfig::new(args.split, layers, args.seed);
    if let Some(e) = args.epochs {
        c.epochs = e;
    }
    if let Some(lr) = args.lr {
        c.learning_rate = lr;
    }
    if let Some(b) = args.batch_size {
        c.batch_size = b;
    }
    if let Some(m) = args.max_samples {
        c.max_samples = (m > 0).then_some(m);
    }
    c
}

fn log_csv(log: &TrainingLog) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(["step", "epoch", "batch_loss", "wallclock_ms"])?;
        for r in &log.rows {
            w.write_record([
                r.step.to_string(),
                r.epoch.to_string(),
                r.batch_loss.to_string(),
                r.wallclock_ms.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn run(args: &TrainArgs) -> Result<()> {
    if args.layers.is_empty() || args.layers.contains(&0) {
        bail!("--layers needs one or more positive counts");
    }
    let split = args.split;
    let mut rec = RunRecorder::new("train", Some(split.as_str()), &args.out, args, args.seed)?;
    let train_set = encode_all(&filter_split(
        &load_mnist(&args.mnist, MnistPart::Train, &mut rec)?,
        split,
    ))?;
    let test_set = encode_all(&filter_split(
        &load_mnist(&args.mnist, MnistPart::Test, &mut rec)?,
        split,
    ))?;

    let mut summary = Vec::new();
    for &layers in &args.layers {
        let config = config_for(args, layers);
        let (model, log) = train(&train_set, &config)?;
        let test_accuracy = accuracy(&test_set, &model)?;
        eprintln!("split {split}, {layers} layer(s): test accuracy {test_accuracy:.4}");
        rec.write(&model_file_name(split, layers), model.to_json().as_bytes())?;
        rec.write(&format!("train-log-{split}-L{layers}.csv"), &log_csv(&log)?)?;
        summary.push(SummaryRow {
            split,
            layers,
            epochs: config.epochs,
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            train_samples: config.max_samples.map_or(train_set.len(), |m| m.min(train_set.len())),
            steps: log.rows.len(),
            final_batch_loss: log.rows.last().map_or(f64::NAN, |r| r.batch_loss),
            test_samples: test_set.len(),
            test_accuracy,
        });
    }
    rec.write(&format!("train-summary-{split}.csv"), &serialize_rows(&summary)?)?;
    rec.finish()?;
    Ok(())
}
