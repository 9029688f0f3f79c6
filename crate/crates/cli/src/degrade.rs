use std::collections::BTreeSet;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::DegradeArgs;
use crate::artifacts::{pgm_bytes, serialize_rows, slug, RunRecorder};
use crate::{encoded_test_image, mean_and_std};
use qnnlab_core::dataset::{POOLED_PIXELS, POOLED_SIDE};
use qnnlab_core::metrics::DECAY_FLOOR;
use qnnlab_core::qnn::layers_circuit;
use qnnlab_core::{
    chi2_between, chi2_to_uniform, fit_exponential_decay, insert_noise, load_device_model, synthesize_prep,
    DecaySeries, DensityMatrix, DeviceNoiseModel, LayerWeights, PureState, QuantumState,
};

pub const PAPER_FIG2_CHECKPOINTS: [usize; 5] = [1, 3, 6, 10, 15];

#[derive(Debug, Clone, Copy, PartialEq)]
enum DegradeInput {
    Image(usize),
    Basis(usize),
    Uniform,
}

fn parse_input(s: &str) -> Result<DegradeInput> {
    let index = |v: &str| {
        v.parse::<usize>()
            .with_context(|| format!("bad index in --input {s:?}"))
    };
    match s.split_once(':') {
        Some(("image", v)) => Ok(DegradeInput::Image(index(v)?)),
        Some(("basis", v)) => Ok(DegradeInput::Basis(index(v)?)),
        None if s == "uniform" => Ok(DegradeInput::Uniform),
        _ => bail!("--input must be image:<index>, basis:<index> or uniform, got {s:?}"),
    }
}

fn parse_checkpoints(s: Option<&str>, depth_max: usize) -> Result<BTreeSet<usize>> {
    let depths: Vec<usize> = match s {
        None => Vec::new(),
        Some("paper-fig2") => PAPER_FIG2_CHECKPOINTS.to_vec(),
        Some(list) => list
            .split(',')
            .map(|d| d.trim().parse().with_context(|| format!("bad checkpoint {d:?}")))
            .collect::<Result<_>>()?,
    };
    Ok(depths.into_iter().filter(|&d| d <= depth_max).collect())
}

#[derive(Serialize)]
struct DegradeRow {
    depth: usize,
    chi2_uniform_mean: f64,
    chi2_uniform_std: f64,
    chi2_ref_mean: f64,
    chi2_ref_std: f64,
}

#[derive(Serialize)]
struct FitRow {
    device: String,
    trials: usize,
    depth_max: usize,
    initial: f64,
    last: f64,
    last_over_initial: f64,
    violations: usize,
    fit_points: usize,
    rate: Option<f64>,
    r2: Option<f64>,
}

#[derive(Serialize)]
struct StateRow {
    depth: usize,
    index: usize,
    probability: f64,
}

struct Trial {
    chi2_uniform: Vec<f64>,
    chi2_ref: Vec<f64>,
    snapshots: Vec<(usize, Vec<f64>)>,
}

struct Start<'a> {
    device: &'a DeviceNoiseModel,
    rho: DensityMatrix,
    psi: PureState,
    prepared_dist: Vec<f64>,
}

/// One trial: fresh uniform angles for all depths, applied one layer at a
/// time so depth `d` is the prefix of the depth-`d + 1` circuit.
fn run_trial(start: &Start, trial: usize, args: &DegradeArgs, checkpoints: &BTreeSet<usize>) -> Result<Trial> {
    let n = start.psi.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(trial as u64);
    let weights = LayerWeights::random_uniform(args.depth_max, n, &mut rng);
    let (mut rho, mut psi) = (start.rho.clone(), start.psi.clone());
    let mut out = Trial {
        chi2_uniform: Vec::new(),
        chi2_ref: Vec::new(),
        snapshots: Vec::new(),
    };
    let keep_snapshots = trial == 0;
    if keep_snapshots && checkpoints.contains(&0) {
        out.snapshots.push((0, start.prepared_dist.clone()));
    }
    for depth in 1..=args.depth_max {
        let layer = LayerWeights::new(1, n, weights.layer(depth - 1).to_vec())?;
        let circuit = layers_circuit(&layer);
        let noisy = insert_noise(&circuit, start.device)?;
        noisy.run(&mut rho)?;
        psi.run(&circuit)?;
        let dist = noisy.measure(&rho)?;
        out.chi2_uniform.push(chi2_to_uniform(&dist));
        out.chi2_ref.push(chi2_between(&dist, &psi.probabilities()?)?);
        if keep_snapshots && checkpoints.contains(&depth) {
            out.snapshots.push((depth, dist.probs().to_vec()));
        }
    }
    Ok(out)
}

pub fn run(args: &DegradeArgs) -> Result<()> {
    if args.depth_max == 0 || args.trials == 0 {
        bail!("--depth-max and --trials must be at least 1");
    }
    let device = load_device_model(&args.device)?;
    let tag = slug(&device.name);
    let mut rec = RunRecorder::new("degrade", Some(&tag), &args.out, args, args.seed)?;
    rec.add_input(&args.device)?;
    let n = device.n_qubits;
    let dim = 1usize << n;
    let amplitudes = match parse_input(&args.input)? {
        DegradeInput::Image(i) => {
            let dir = args
                .mnist
                .as_deref()
                .context("--input image:<index> needs --mnist or QNNLAB_MNIST")?;
            let x = encoded_test_image(dir, i, &mut rec)?.amplitudes;
            if x.len() != dim {
                bail!(
                    "an encoded image needs {} qubits, device {} has {n}",
                    x.len().trailing_zeros(),
                    device.name
                );
            }
            x
        }
        DegradeInput::Basis(k) if k < dim => (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect(),
        DegradeInput::Basis(k) => bail!("basis index {k} is out of range for {n} qubits"),
        DegradeInput::Uniform => vec![(dim as f64).sqrt().recip(); dim],
    };
    let checkpoints = parse_checkpoints(args.checkpoints.as_deref(), args.depth_max)?;

    let prep = synthesize_prep(&amplitudes)?;
    let noisy_prep = insert_noise(prep.circuit(), &device)?;
    let rho = noisy_prep.simulate()?;
    let start = Start {
        device: &device,
        prepared_dist: noisy_prep.measure(&rho)?.probs().to_vec(),
        rho,
        psi: prep.prepare()?,
    };
    let trials: Vec<Trial> = (0..args.trials)
        .into_par_iter()
        .map(|t| run_trial(&start, t, args, &checkpoints))
        .collect::<Result<_>>()?;

    let column = |d: usize, pick: fn(&Trial) -> &Vec<f64>| trials.iter().map(|t| pick(t)[d]).collect::<Vec<_>>();
    let rows: Vec<DegradeRow> = (0..args.depth_max)
        .map(|d| {
            let (chi2_uniform_mean, chi2_uniform_std) = mean_and_std(&column(d, |t| &t.chi2_uniform));
            let (chi2_ref_mean, chi2_ref_std) = mean_and_std(&column(d, |t| &t.chi2_ref));
            DegradeRow {
                depth: d + 1,
                chi2_uniform_mean,
                chi2_uniform_std,
                chi2_ref_mean,
                chi2_ref_std,
            }
        })
        .collect();

    let means: Vec<f64> = rows.iter().map(|r| r.chi2_uniform_mean).collect();
    let series = DecaySeries::new((1..=args.depth_max as u32).collect(), means.clone())?;
    let head = series.pre_floor(DECAY_FLOOR);
    let fit = fit_exponential_decay(&head).ok();
    let (initial, last) = (means[0], means[means.len() - 1]);
    let fit_row = FitRow {
        device: device.name.clone(),
        trials: args.trials,
        depth_max: args.depth_max,
        initial,
        last,
        last_over_initial: last / initial,
        violations: series.monotonicity_violations(),
        fit_points: head.len(),
        rate: fit.map(|f| f.0),
        r2: fit.map(|f| f.1),
    };

    rec.write(&format!("degrade-{tag}.csv"), &serialize_rows(&rows)?)?;
    rec.write(&format!("degrade-fit-{tag}.csv"), &serialize_rows(&[fit_row])?)?;
    let snapshots = &trials[0].snapshots;
    if !snapshots.is_empty() {
        let states: Vec<StateRow> = snapshots
            .iter()
            .flat_map(|(depth, p)| {
                p.iter().enumerate().map(|(index, &probability)| StateRow {
                    depth: *depth,
                    index,
                    probability,
                })
            })
            .collect();
        rec.write(&format!("degrade-states-{tag}.csv"), &serialize_rows(&states)?)?;
        if dim >= POOLED_PIXELS {
            for (depth, p) in snapshots {
                rec.write(
                    &format!("degrade-{tag}-d{depth}.pgm"),
                    &pgm_bytes(&p[..POOLED_PIXELS], POOLED_SIDE)?,
                )?;
            }
        }
    }
    rec.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_spec_parsing() {
        assert_eq!(parse_input("image:12").unwrap(), DegradeInput::Image(12));
        assert_eq!(parse_input("basis:3").unwrap(), DegradeInput::Basis(3));
        assert_eq!(parse_input("uniform").unwrap(), DegradeInput::Uniform);
        for bad in ["image", "image:x", "basis:-1", "zero", "uniform:1"] {
            assert!(parse_input(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn checkpoint_presets() {
        let fig2 = parse_checkpoints(Some("paper-fig2"), 60).unwrap();
        assert_eq!(fig2.into_iter().collect::<Vec<_>>(), vec![1, 3, 6, 10, 15]);
        let clipped = parse_checkpoints(Some("0, 5,90"), 60).unwrap();
        assert_eq!(clipped.into_iter().collect::<Vec<_>>(), vec![0, 5]);
        assert!(parse_checkpoints(None, 60).unwrap().is_empty());
        assert!(parse_checkpoints(Some("1,a"), 60).is_err());
    }
}
