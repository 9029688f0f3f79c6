use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::EvalArgs;
use crate::artifacts::{csv_bytes, serialize_rows, RunRecorder};
use crate::load_mnist;
use qnnlab_core::qnn::{argmax, forward_from_density, forward_from_pure, noisy_prepared_state};
use qnnlab_core::training::prepare_input;
use qnnlab_core::{
    encode_all, filter_split, load_device_model, DeviceNoiseModel, EncodedSample, MnistPart, QnnModel, Split,
};

pub const BASE_ROW: &str = "base";

struct LoadedModel {
    file: String,
    split: Split,
    model: QnnModel,
}

struct NoiseCase {
    name: String,
    device: Option<DeviceNoiseModel>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AccuracyCell {
    pub split: Split,
    pub noise_model: String,
    pub layers: usize,
    pub model: String,
    pub samples: usize,
    pub correct: usize,
    pub accuracy: f64,
}

fn split_of(model: &QnnModel) -> Result<Split> {
    Split::ALL
        .into_iter()
        .find(|s| s.class_labels() == model.class_labels())
        .with_context(|| format!("class labels {:?} match no split", model.class_labels()))
}

/// About `limit` samples with equal counts per class, drawn by a seeded
/// shuffle within each class and returned in file order.
fn balanced_subset(samples: &[EncodedSample], split: Split, limit: usize, seed: u64) -> Result<Vec<usize>> {
    let k = split.n_classes();
    if limit < k {
        bail!("--limit {limit} is smaller than the {k} classes of split {split}");
    }
    let mut chosen = Vec::with_capacity(limit);
    for class in split.class_labels() {
        let mut members: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == class).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(4000 + class as u64);
        members.shuffle(&mut rng);
        chosen.extend(members.into_iter().take(limit / k));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Hit flags indexed `[case][model]` for one sample.
fn score_sample(
    x: &[f64],
    label: u8,
    models: &[&LoadedModel],
    cases: &[NoiseCase],
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<Vec<bool>>> {
    let seed = shots.map(|_| seed);
    let hit = |m: &LoadedModel, probs: &[f64]| m.model.class_labels()[argmax(probs)] == label;
    cases
        .iter()
        .map(|case| match &case.device {
            None => {
                let psi = prepare_input(x)?;
                models
                    .iter()
                    .map(|m| Ok(hit(m, &forward_from_pure(&psi, &m.model, shots, seed)?.probs)))
                    .collect()
            }
            Some(device) => {
                let rho = noisy_prepared_state(x, device)?;
                models
                    .iter()
                    .map(|m| {
                        Ok(hit(
                            m,
                            &forward_from_density(&rho, &m.model, device, shots, seed)?.probs,
                        ))
                    })
                    .collect()
            }
        })
        .collect()
}

fn table_csv(cells: &[AccuracyCell], cases: &[NoiseCase]) -> Result<Vec<u8>> {
    let layer_counts: BTreeSet<usize> = cells.iter().map(|c| c.layers).collect();
    let splits: BTreeSet<Split> = cells.iter().map(|c| c.split).collect();
    csv_bytes(|w| {
        let mut header = vec!["split".to_string(), "noise_model".to_string()];
        header.extend(layer_counts.iter().map(|l| format!("L{l}")));
        w.write_record(&header)?;
        for split in &splits {
            for case in cases {
                let mut row = vec![split.to_string(), case.name.clone()];
                for l in &layer_counts {
                    let cell = cells
                        .iter()
                        .find(|c| c.split == *split && c.noise_model == case.name && c.layers == *l);
                    row.push(cell.map(|c| format!("{:?}", c.accuracy)).unwrap_or_default());
                }
                w.write_record(&row)?;
            }
        }
        Ok(())
    })
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let mut rec = RunRecorder::new("eval", None, &args.out, args, args.seed)?;
    let mut models = Vec::new();
    for path in &args.models {
        rec.add_input(path)?;
        let model = QnnModel::load(path).with_context(|| format!("loading model {}", path.display()))?;
        let file = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
        models.push(LoadedModel {
            file,
            split: split_of(&model)?,
            model,
        });
    }
    let mut seen = BTreeSet::new();
    for m in &models {
        if !seen.insert((m.split, m.model.n_layers())) {
            bail!(
                "two models fill the cell split {} with {} layer(s)",
                m.split,
                m.model.n_layers()
            );
        }
    }

    let mut cases = vec![NoiseCase {
        name: BASE_ROW.to_string(),
        device: None,
    }];
    for path in &args.devices {
        rec.add_input(path)?;
        let device = load_device_model(path)?;
        for m in &models {
            if m.model.n_qubits() > device.n_qubits {
                bail!(
                    "model {} needs {} qubits but device {} ({}) has {}",
                    m.file,
                    m.model.n_qubits(),
                    device.name,
                    path.display(),
                    device.n_qubits
                );
            }
        }
        for &scale in &args.noise_scale {
            let scaled = device.scaled(scale)?;
            if cases.iter().any(|c| c.name == scaled.name) {
                bail!("noise model {} appears twice", scaled.name);
            }
            cases.push(NoiseCase {
                name: scaled.name.clone(),
                device: Some(scaled),
            });
        }
    }

    let test = load_mnist(&args.mnist, MnistPart::Test, &mut rec)?;
    let mut by_split: BTreeMap<Split, Vec<&LoadedModel>> = BTreeMap::new();
    for m in &models {
        by_split.entry(m.split).or_default().push(m);
    }
    let mut cells = Vec::new();
    for (split, group) in &by_split {
        let samples = encode_all(&filter_split(&test, *split))?;
        let picked: Vec<usize> = match args.limit {
            Some(limit) => balanced_subset(&samples, *split, limit, args.seed)?,
            None => (0..samples.len()).collect(),
        };
        eprintln!(
            "split {split}: {} samples x {} noise models x {} models",
            picked.len(),
            cases.len(),
            group.len()
        );
        let hits: Vec<Vec<Vec<bool>>> = picked
            .par_iter()
            .map(|&i| {
                score_sample(
                    &samples[i].amplitudes,
                    samples[i].label,
                    group,
                    &cases,
                    args.shots,
                    args.seed ^ i as u64,
                )
            })
            .collect::<Result<_>>()?;
        for (c, case) in cases.iter().enumerate() {
            for (j, m) in group.iter().enumerate() {
                let correct = hits.iter().filter(|h| h[c][j]).count();
                cells.push(AccuracyCell {
                    split: *split,
                    noise_model: case.name.clone(),
                    layers: m.model.n_layers(),
                    model: m.file.clone(),
                    samples: picked.len(),
                    correct,
                    accuracy: correct as f64 / picked.len() as f64,
                });
            }
        }
    }
    rec.write("accuracy.csv", &table_csv(&cells, &cases)?)?;
    rec.write("accuracy-long.csv", &serialize_rows(&cells)?)?;
    rec.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(labels: &[u8]) -> Vec<EncodedSample> {
        labels
            .iter()
            .map(|&label| EncodedSample {
                amplitudes: vec![1.0, 0.0],
                label,
            })
            .collect()
    }

    #[test]
    fn balanced_subset_takes_equal_class_counts() {
        let data = samples(&[1, 1, 1, 1, 1, 0, 1, 0, 0, 1]);
        let picked = balanced_subset(&data, Split::ZeroOne, 4, 3).unwrap();
        assert_eq!(picked.len(), 4);
        assert!(picked.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(picked.iter().filter(|&&i| data[i].label == 0).count(), 2);
        assert_eq!(balanced_subset(&data, Split::ZeroOne, 4, 3).unwrap(), picked);
        assert!(balanced_subset(&data, Split::ZeroNine, 5, 3).is_err());
    }
}
