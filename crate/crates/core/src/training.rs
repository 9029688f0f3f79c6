//! Noise-free training: adjoint gradients, a parameter-shift oracle, Adam
//! and the minibatch loop.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{EncodedSample, Split};
use crate::device::DeviceNoiseModel;
use crate::error::{QnnError, TrainError};
use crate::gates::{ry_matrix, rz_matrix, GateOp, C64};
use crate::mottonen::synthesize_prep;
use crate::qnn::{forward_from_pure, Forward, Provenance, QnnModel};
use crate::state::{PureState, QuantumState};

/// Added to the target probability inside the logarithm.
pub const LOSS_EPS: f64 = 1e-12;

pub fn cross_entropy(probs: &[f64], label: usize) -> Result<f64, TrainError> {
    probs
        .get(label)
        .map(|p| -(p + LOSS_EPS).ln())
        .ok_or_else(|| TrainError::Argument(format!("label {label} out of range for {} classes", probs.len())))
}

/// Identifies one trainable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamIndex {
    /// `angle` 0, 1, 2 are the φ, θ, ω of `Rot = RZ(ω)·RY(θ)·RZ(φ)`.
    Rotation {
        layer: usize,
        qubit: usize,
        angle: usize,
    },
    HeadWeight {
        class: usize,
        input: usize,
    },
    HeadBias {
        class: usize,
    },
}

impl ParamIndex {
    /// Position in [`QnnModel::params`].
    pub fn flat(self, model: &QnnModel) -> Result<usize, TrainError> {
        let (l, n, k) = (model.n_layers(), model.n_qubits(), model.n_classes());
        let angles = l * n * 3;
        match self {
            ParamIndex::Rotation { layer, qubit, angle } if layer < l && qubit < n && angle < 3 => {
                Ok(model.layers().flat_index(layer, qubit, angle))
            }
            ParamIndex::HeadWeight { class, input } if class < k && input < n => Ok(angles + class * n + input),
            ParamIndex::HeadBias { class } if class < k => Ok(angles + k * n + class),
            other => Err(TrainError::Index(format!(
                "{other:?} for a model with {l} layers, {n} qubits, {k} classes"
            ))),
        }
    }
}

/// Loss and gradient of every parameter for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub layers: Vec<f64>,
    pub head_weights: Vec<f64>,
    pub head_bias: Vec<f64>,
}

impl Gradients {
    fn zeros_like(model: &QnnModel) -> Self {
        Gradients {
            loss: 0.0,
            layers: vec![0.0; model.layers().as_slice().len()],
            head_weights: vec![0.0; model.head().weights().len()],
            head_bias: vec![0.0; model.n_classes()],
        }
    }

    /// Same order as [`QnnModel::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.layers.len() + self.head_weights.len() + self.head_bias.len());
        v.extend_from_slice(&self.layers);
        v.extend_from_slice(&self.head_weights);
        v.extend_from_slice(&self.head_bias);
        v
    }

    fn add_assign(&mut self, other: &Gradients) {
        self.loss += other.loss;
        let pairs = self
            .layers
            .iter_mut()
            .zip(&other.layers)
            .chain(self.head_weights.iter_mut().zip(&other.head_weights))
            .chain(self.head_bias.iter_mut().zip(&other.head_bias));
        for (a, b) in pairs {
            *a += b;
        }
    }

    fn scale(&mut self, s: f64) {
        self.loss *= s;
        for x in self
            .layers
            .iter_mut()
            .chain(&mut self.head_weights)
            .chain(&mut self.head_bias)
        {
            *x *= s;
        }
    }
}

fn check_label(model: &QnnModel, label: usize) -> Result<(), TrainError> {
    if label >= model.n_classes() {
        return Err(TrainError::Argument(format!(
            "label {label} out of range for {} classes",
            model.n_classes()
        )));
    }
    Ok(())
}

/// `∂loss/∂logits = c·(p − onehot)` with `c = p_y / (p_y + ε)` from the
/// smoothed logarithm.
fn logit_gradient(probs: &[f64], label: usize) -> Vec<f64> {
    let c = probs[label] / (probs[label] + LOSS_EPS);
    probs
        .iter()
        .enumerate()
        .map(|(k, p)| c * (p - if k == label { 1.0 } else { 0.0 }))
        .collect()
}

/// `∂loss/∂z_j = Σ_k W_kj δ_k`.
fn expval_gradient(model: &QnnModel, delta: &[f64]) -> Vec<f64> {
    let n = model.n_qubits();
    let mut g = vec![0.0; n];
    for (row, d) in model.head().weights().chunks_exact(n).zip(delta) {
        for (gj, w) in g.iter_mut().zip(row) {
            *gj += w * d;
        }
    }
    g
}

pub fn prepare_input(input: &[f64]) -> Result<PureState, TrainError> {
    Ok(synthesize_prep(input)?.prepare()?)
}

pub fn adjoint_gradients(
    input: &[f64],
    model: &QnnModel,
    label: usize,
    noise: Option<&DeviceNoiseModel>,
) -> Result<Gradients, TrainError> {
    if noise.is_some() {
        return Err(TrainError::UnsupportedMode);
    }
    adjoint_gradients_prepared(&prepare_input(input)?, model, label)
}

enum Step {
    Rz { qubit: usize, theta: f64, param: usize },
    Ry { qubit: usize, theta: f64, param: usize },
    Cnot(usize, usize),
}

/// The layers with each `Rot` expanded into its three elementary rotations.
fn expanded_steps(model: &QnnModel) -> Vec<Step> {
    let n = model.n_qubits();
    let w = model.layers();
    let mut steps = Vec::with_capacity(w.n_layers() * n * 4);
    for l in 0..w.n_layers() {
        for q in 0..n {
            let base = w.flat_index(l, q, 0);
            let a = &w.as_slice()[base..base + 3];
            steps.push(Step::Rz {
                qubit: q,
                theta: a[0],
                param: base,
            });
            steps.push(Step::Ry {
                qubit: q,
                theta: a[1],
                param: base + 1,
            });
            steps.push(Step::Rz {
                qubit: q,
                theta: a[2],
                param: base + 2,
            });
        }
        let n_cnots = match n {
            1 => 0,
            2 => 1,
            n => n,
        };
        steps.extend((0..n_cnots).map(|q| Step::Cnot(q, (q + 1) % n)));
    }
    steps
}

fn apply_step(psi: &mut PureState, step: &Step, inverse: bool) {
    let sign = if inverse { -1.0 } else { 1.0 };
    match *step {
        Step::Rz { qubit, theta, .. } => psi.apply_matrix(&[qubit], &rz_matrix(sign * theta)),
        Step::Ry { qubit, theta, .. } => psi.apply_matrix(&[qubit], &ry_matrix(sign * theta)),
        Step::Cnot(c, t) => psi
            .apply_gate_in_place(&GateOp::cnot(c, t))
            .expect("ring gates stay in range"),
    }
}

/// Exact gradients from a backward sweep: with `λ = H|ψ⟩`, `H = Σ g_j Z_j`,
/// each angle contributes `2 Re⟨λ_m| ∂G_m |ψ_{m−1}⟩`.
pub fn adjoint_gradients_prepared(
    prepared: &PureState,
    model: &QnnModel,
    label: usize,
) -> Result<Gradients, TrainError> {
    check_label(model, label)?;
    let n = model.n_qubits();
    if prepared.n_qubits() != n {
        return Err(TrainError::Shape(format!(
            "input is {} qubits wide, model expects {n}",
            prepared.n_qubits()
        )));
    }
    let steps = expanded_steps(model);
    let mut psi = prepared.clone();
    for s in &steps {
        apply_step(&mut psi, s, false);
    }
    let expvals: Vec<f64> = (0..n).map(|q| psi.expect_z(q)).collect::<Result<_, _>>()?;
    let probs = crate::qnn::softmax(&model.head().logits(&expvals));
    let delta = logit_gradient(&probs, label);
    let g = expval_gradient(model, &delta);

    let mut grads = Gradients::zeros_like(model);
    grads.loss = cross_entropy(&probs, label)?;
    for (k, d) in delta.iter().enumerate() {
        grads.head_bias[k] = *d;
        for (j, z) in expvals.iter().enumerate() {
            grads.head_weights[k * n + j] = d * z;
        }
    }

    let mut lambda = psi.clone();
    for (idx, a) in lambda.amplitudes_mut().iter_mut().enumerate() {
        let h: f64 = g
            .iter()
            .enumerate()
            .map(|(q, gq)| if idx >> (n - 1 - q) & 1 == 0 { *gq } else { -gq })
            .sum();
        *a *= h;
    }
    for s in steps.iter().rev() {
        apply_step(&mut psi, s, true);
        let (qubit, param, dm) = match *s {
            Step::Rz { qubit, theta, param } => (qubit, param, d_rz(theta)),
            Step::Ry { qubit, theta, param } => (qubit, param, d_ry(theta)),
            Step::Cnot(..) => {
                apply_step(&mut lambda, s, true);
                continue;
            }
        };
        let mut mu = psi.clone();
        mu.apply_matrix(&[qubit], &dm);
        grads.layers[param] = 2.0 * lambda.inner(&mu)?.re;
        apply_step(&mut lambda, s, true);
    }
    Ok(grads)
}

fn d_rz(theta: f64) -> [C64; 4] {
    let h = theta / 2.0;
    let z = C64::new(0.0, 0.0);
    [
        C64::new(-h.sin() / 2.0, -h.cos() / 2.0),
        z,
        z,
        C64::new(-h.sin() / 2.0, h.cos() / 2.0),
    ]
}

fn d_ry(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        C64::new(-s / 2.0, 0.0),
        C64::new(-c / 2.0, 0.0),
        C64::new(c / 2.0, 0.0),
        C64::new(-s / 2.0, 0.0),
    ]
}

/// Loss and forward pass through exact expectation values.
pub fn exact_loss(prepared: &PureState, model: &QnnModel, label: usize) -> Result<(f64, Forward), TrainError> {
    check_label(model, label)?;
    let f = forward_from_pure(prepared, model, None, None)?;
    Ok((cross_entropy(&f.probs, label)?, f))
}

/// Gradient of one rotation angle from expectation values shifted by ±π/2,
/// chained through the head: `Σ_j (∂loss/∂z_j)·(z_j(θ+π/2) − z_j(θ−π/2))/2`.
/// Head parameters are a domain error.
pub fn parameter_shift_gradient(
    input: &[f64],
    model: &QnnModel,
    label: usize,
    index: ParamIndex,
) -> Result<f64, TrainError> {
    parameter_shift_gradient_prepared(&prepare_input(input)?, model, label, index)
}

pub fn parameter_shift_gradient_prepared(
    prepared: &PureState,
    model: &QnnModel,
    label: usize,
    index: ParamIndex,
) -> Result<f64, TrainError> {
    let flat = index.flat(model)?;
    if !matches!(index, ParamIndex::Rotation { .. }) {
        return Err(TrainError::Domain(format!("{index:?}; it is not a rotation angle")));
    }
    let (_, f) = exact_loss(prepared, model, label)?;
    let g = expval_gradient(model, &logit_gradient(&f.probs, label));
    let shifted = |delta: f64| -> Result<Vec<f64>, TrainError> {
        let mut m = model.clone();
        m.layers_mut().as_mut_slice()[flat] += delta;
        Ok(forward_from_pure(prepared, &m, None, None)?.expvals)
    };
    let plus = shifted(FRAC_PI_2)?;
    let minus = shifted(-FRAC_PI_2)?;
    Ok(g.iter()
        .zip(plus.iter().zip(&minus))
        .map(|(gj, (p, m))| gj * (p - m) / 2.0)
        .sum())
}

/// Adam moments and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// Bias-corrected update of `params` in place.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), TrainError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(TrainError::Shape(format!(
                "adam state holds {} parameters, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

pub fn adam_step(
    params: &[f64],
    grads: &[f64],
    state: &AdamState,
    lr: f64,
) -> Result<(Vec<f64>, AdamState), TrainError> {
    let mut p = params.to_vec();
    let mut s = state.clone();
    s.update(&mut p, grads, lr)?;
    Ok((p, s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub layers: usize,
    pub split: Split,
    /// Leading samples kept from the training set; `None` keeps all.
    pub max_samples: Option<usize>,
}

impl TrainConfig {
    /// Learning rate 0.01, batch 16, the split's epoch count, and all samples
    /// for 0-1 or 8000 otherwise.
    pub fn new(split: Split, layers: usize, seed: u64) -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 16,
            epochs: split.default_epochs(),
            seed,
            layers,
            split,
            max_samples: match split {
                Split::ZeroOne => None,
                _ => Some(8000),
            },
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Argument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 || self.layers == 0 {
            return Err(TrainError::Argument(
                "batch size, epochs and layers must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: usize,
    pub epoch: usize,
    pub batch_loss: f64,
    pub wallclock_ms: u128,
}

/// Per-batch mean loss, measured before the update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

/// Mean gradients over `batch`, summed in index order.
pub fn batch_gradients(
    prepared: &[PureState],
    labels: &[usize],
    batch: &[usize],
    model: &QnnModel,
) -> Result<Gradients, TrainError> {
    let per_sample: Vec<Gradients> = batch
        .par_iter()
        .map(|&i| adjoint_gradients_prepared(&prepared[i], model, labels[i]))
        .collect::<Result<_, _>>()?;
    let mut total = Gradients::zeros_like(model);
    for g in &per_sample {
        total.add_assign(g);
    }
    total.scale(1.0 / batch.len() as f64);
    Ok(total)
}

/// Trains a fresh model. Deterministic given `config.seed`: the model init
/// and each epoch's shuffle use their own streams.
pub fn train(dataset: &[EncodedSample], config: &TrainConfig) -> Result<(QnnModel, TrainingLog), TrainError> {
    config.validate()?;
    let n_keep = config.max_samples.map_or(dataset.len(), |m| m.min(dataset.len()));
    let samples = &dataset[..n_keep];
    if samples.is_empty() {
        return Err(TrainError::Argument("training set is empty".into()));
    }
    let class_labels = config.split.class_labels();
    let labels: Vec<usize> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            class_labels.iter().position(|&c| c == s.label).ok_or_else(|| {
                TrainError::Argument(format!(
                    "sample {i} has label {} outside split {}",
                    s.label, config.split
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    let width = samples[0].amplitudes.len();
    if !width.is_power_of_two() || width < 2 {
        return Err(TrainError::Shape(format!("amplitude vectors of length {width}")));
    }
    let n_qubits = width.trailing_zeros() as usize;
    let prepared: Vec<PureState> = samples
        .par_iter()
        .map(|s| prepare_input(&s.amplitudes))
        .collect::<Result<_, _>>()?;

    let mut model = QnnModel::init(n_qubits, config.layers, class_labels, config.seed).map_err(TrainError::Qnn)?;
    let mut adam = AdamState::new(model.n_params());
    let mut params = model.params();
    let mut log = TrainingLog::default();
    let start = Instant::now();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut step = 0;
    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1000 + epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let grads = batch_gradients(&prepared, &labels, batch, &model)?;
            adam.update(&mut params, &grads.flatten(), config.learning_rate)?;
            model.set_params(&params).map_err(TrainError::Qnn)?;
            log.rows.push(LogRow {
                step,
                epoch,
                batch_loss: grads.loss,
                wallclock_ms: start.elapsed().as_millis(),
            });
            step += 1;
        }
    }
    model.provenance = Some(Provenance {
        seed: config.seed,
        split: config.split.to_string(),
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
        train_samples: samples.len(),
    });
    Ok((model, log))
}

/// Fraction of samples whose predicted label matches, noise-free and exact.
pub fn accuracy(samples: &[EncodedSample], model: &QnnModel) -> Result<f64, QnnError> {
    if samples.is_empty() {
        return Err(QnnError::Argument("cannot score an empty set".into()));
    }
    let inputs: Vec<&[f64]> = samples.iter().map(|s| s.amplitudes.as_slice()).collect();
    let predicted = crate::qnn::predict(&inputs, model, None, None, None)?;
    let hits = predicted.iter().zip(samples).filter(|(p, s)| **p == s.label).count();
    Ok(hits as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnn::{DenseHead, LayerWeights};
    use rand::Rng;

    #[test]
    fn cross_entropy_examples() {
        assert!(cross_entropy(&[1.0, 0.0], 0).unwrap().abs() < 1e-11);
        assert!((cross_entropy(&[0.1; 10], 4).unwrap() - 10f64.ln()).abs() < 1e-10);
        assert!((cross_entropy(&[0.7, 0.3], 1).unwrap() - 1.2039728043259361).abs() < 1e-10);
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn zero_weights_bias_gradient_is_softmax_minus_onehot() {
        let model = QnnModel::new(
            LayerWeights::zeros(1, 2),
            DenseHead::new(3, 2, vec![0.0; 6], vec![0.0; 3]).unwrap(),
            vec![0, 1, 2],
        )
        .unwrap();
        let g = adjoint_gradients(&[0.5; 4], &model, 2, None).unwrap();
        let third = 1.0 / 3.0;
        let c = third / (third + LOSS_EPS);
        for (k, b) in g.head_bias.iter().enumerate() {
            let expected = c * (third - if k == 2 { 1.0 } else { 0.0 });
            assert!((b - expected).abs() < 1e-15);
        }
        assert!(g.layers.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn noise_is_unsupported() {
        let model = QnnModel::init(2, 1, vec![0, 1], 0).unwrap();
        let text =
            std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/example-lownoise.json")).unwrap();
        let dev = DeviceNoiseModel::from_json_str(&text).unwrap();
        assert!(matches!(
            adjoint_gradients(&[1.0, 0.0, 0.0, 0.0], &model, 0, Some(&dev)),
            Err(TrainError::UnsupportedMode)
        ));
    }

    #[test]
    fn shift_rule_on_single_rotation_matches_closed_form() {
        // one qubit from |0⟩: ⟨Z⟩ = cos θ regardless of the two RZ angles
        let theta = 0.8;
        let layers = LayerWeights::new(1, 1, vec![0.4, theta, -1.1]).unwrap();
        let head = DenseHead::new(2, 1, vec![1.5, -0.5], vec![0.1, 0.0]).unwrap();
        let model = QnnModel::new(layers, head, vec![0, 1]).unwrap();
        let z = theta.cos();
        let p = crate::qnn::softmax(&[1.5 * z + 0.1, -0.5 * z]);
        let c = p[1] / (p[1] + LOSS_EPS);
        let dl_dz = c * (p[0] * 1.5 + (p[1] - 1.0) * -0.5);
        let expected = dl_dz * -theta.sin();
        let idx = |angle| ParamIndex::Rotation {
            layer: 0,
            qubit: 0,
            angle,
        };
        let shift = parameter_shift_gradient(&[1.0, 0.0], &model, 1, idx(1)).unwrap();
        assert!((shift - expected).abs() < 1e-12);
        assert!(parameter_shift_gradient(&[1.0, 0.0], &model, 1, idx(0)).unwrap().abs() < 1e-12);
        assert!(matches!(
            parameter_shift_gradient(&[1.0, 0.0], &model, 1, ParamIndex::HeadWeight { class: 0, input: 0 }),
            Err(TrainError::Domain(_))
        ));
        assert!(matches!(
            parameter_shift_gradient(
                &[1.0, 0.0],
                &model,
                1,
                ParamIndex::Rotation {
                    layer: 1,
                    qubit: 0,
                    angle: 0
                }
            ),
            Err(TrainError::Index(_))
        ));
    }

    #[test]
    fn adjoint_matches_parameter_shift_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let model = QnnModel::init(3, 2, vec![0, 1, 2], 17).unwrap();
        let x: Vec<f64> = (0..8).map(|_| rng.gen::<f64>()).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let g = adjoint_gradients(&x, &model, 1, None).unwrap();
        for layer in 0..2 {
            for qubit in 0..3 {
                for angle in 0..3 {
                    let idx = ParamIndex::Rotation { layer, qubit, angle };
                    let ps = parameter_shift_gradient(&x, &model, 1, idx).unwrap();
                    assert!((ps - g.layers[idx.flat(&model).unwrap()]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn adam_examples() {
        let s = AdamState::new(2);
        let (p, s1) = adam_step(&[0.3, -0.2], &[0.0, 0.0], &s, 0.01).unwrap();
        assert_eq!(p, vec![0.3, -0.2]);
        assert_eq!(s1.step_count(), 1);

        let (p, _) = adam_step(&[1.0, 1.0], &[2.5, -0.003], &s, 0.01).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] - 1.01).abs() < 1e-5);

        let mut st = AdamState::new(1);
        let mut x = [0.5];
        let expected = [0.4900000005, 0.4873366302718676, 0.48098342873247407];
        for (g, e) in [0.2, -0.1, 0.3].iter().zip(expected) {
            st.update(&mut x, &[*g], 0.01).unwrap();
            assert!((x[0] - e).abs() < 1e-15, "{} vs {e}", x[0]);
        }
        assert!(st.update(&mut x, &[0.0, 0.0], 0.01).is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = TrainConfig::new(Split::ZeroThree, 3, 1);
        assert_eq!((c.batch_size, c.epochs, c.max_samples), (16, 2, Some(8000)));
        assert_eq!(c.learning_rate, 0.01);
        let mut bad = c.clone();
        bad.learning_rate = 0.0;
        assert!(train(&[], &bad).is_err());
        assert!(train(&[], &c).is_err());
    }
}
