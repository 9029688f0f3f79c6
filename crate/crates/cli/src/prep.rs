use anyhow::{bail, Result};
use serde::Serialize;

use crate::args::PrepArgs;
use crate::artifacts::{pgm_bytes, serialize_rows, slug, RunRecorder};
use crate::encoded_test_image;
use qnnlab_core::dataset::{POOLED_PIXELS, POOLED_SIDE};
use qnnlab_core::{
    chi2_between, fidelity, insert_noise, load_device_model, synthesize_prep, total_variation, QuantumState,
};

#[derive(Serialize)]
struct ProbRow<'a> {
    model: &'a str,
    index: usize,
    probability: f64,
}

#[derive(Serialize)]
struct MetricsRow {
    model: String,
    total_variation: f64,
    chi2_ref: f64,
    fidelity: f64,
    /// Index of the largest `noisy − ideal`.
    max_excess_index: usize,
    max_excess: f64,
}

pub fn run(args: &PrepArgs) -> Result<()> {
    let mut rec = RunRecorder::new("prep", None, &args.out, args, args.seed)?;
    let sample = encoded_test_image(&args.mnist, args.image, &mut rec)?;
    let prep = synthesize_prep(&sample.amplitudes)?;
    let psi = prep.prepare()?;
    let ideal = psi.probabilities()?;

    let mut names = vec!["ideal".to_string()];
    let mut dists = vec![ideal.probs().to_vec()];
    let mut metrics = Vec::new();
    for path in &args.devices {
        rec.add_input(path)?;
        let device = load_device_model(path)?;
        let name = slug(&device.name);
        if names.contains(&name) {
            bail!("device name {name} appears twice");
        }
        let noisy = insert_noise(prep.circuit(), &device)?;
        let rho = noisy.simulate()?;
        let dist = noisy.measure(&rho)?;
        let (max_excess_index, max_excess) = dist
            .probs()
            .iter()
            .zip(ideal.probs())
            .map(|(p, q)| p - q)
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, e)| if e > best.1 { (i, e) } else { best },
            );
        metrics.push(MetricsRow {
            model: name.clone(),
            total_variation: total_variation(&dist, &ideal)?,
            chi2_ref: chi2_between(&dist, &ideal)?,
            fidelity: fidelity(&rho, &psi)?,
            max_excess_index,
            max_excess,
        });
        names.push(name);
        dists.push(dist.probs().to_vec());
    }

    for (name, p) in names.iter().zip(&dists) {
        rec.write(
            &format!("prep-{name}.pgm"),
            &pgm_bytes(&p[..POOLED_PIXELS], POOLED_SIDE)?,
        )?;
    }
    let rows: Vec<ProbRow> = names
        .iter()
        .zip(&dists)
        .flat_map(|(name, p)| {
            p.iter().enumerate().map(move |(index, &probability)| ProbRow {
                model: name,
                index,
                probability,
            })
        })
        .collect();
    rec.write("prep.csv", &serialize_rows(&rows)?)?;
    if !metrics.is_empty() {
        rec.write("prep-metrics.csv", &serialize_rows(&metrics)?)?;
    }
    rec.finish()?;
    Ok(())
}
