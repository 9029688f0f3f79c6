//! Layered variational classifier: amplitude-encoding prep, strongly
//! entangling layers, per-qubit ⟨Z⟩ readout and a dense softmax head.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceNoiseModel;
use crate::error::QnnError;
use crate::gates::{Circuit, GateOp};
use crate::mottonen::synthesize_prep;
use crate::noisy::insert_noise;
use crate::state::{sample_counts, DensityMatrix, ProbDist, PureState, QuantumState};

pub const MODEL_VERSION: &str = "qnnmodel/1";

/// Rotation angles shaped `[layers][qubits][3]`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    n_layers: usize,
    n_qubits: usize,
    data: Vec<f64>,
}

impl LayerWeights {
    pub fn new(n_layers: usize, n_qubits: usize, data: Vec<f64>) -> Result<Self, QnnError> {
        if data.len() != n_layers * n_qubits * 3 {
            return Err(QnnError::Shape(format!(
                "layer weights [{n_layers}][{n_qubits}][3] need {} values, got {}",
                n_layers * n_qubits * 3,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(QnnError::Argument(format!("layer weight {i} is not finite")));
        }
        Ok(LayerWeights {
            n_layers,
            n_qubits,
            data,
        })
    }

    pub fn zeros(n_layers: usize, n_qubits: usize) -> Self {
        LayerWeights {
            n_layers,
            n_qubits,
            data: vec![0.0; n_layers * n_qubits * 3],
        }
    }

    /// Angles drawn uniformly from `[0, 2π)`.
    pub fn random_uniform<R: Rng>(n_layers: usize, n_qubits: usize, rng: &mut R) -> Self {
        let data = (0..n_layers * n_qubits * 3).map(|_| rng.gen_range(0.0..TAU)).collect();
        LayerWeights {
            n_layers,
            n_qubits,
            data,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn flat_index(&self, layer: usize, qubit: usize, angle: usize) -> usize {
        (layer * self.n_qubits + qubit) * 3 + angle
    }

    pub fn get(&self, layer: usize, qubit: usize, angle: usize) -> f64 {
        self.data[self.flat_index(layer, qubit, angle)]
    }

    /// The `[qubits][3]` block of one layer.
    pub fn layer(&self, layer: usize) -> &[f64] {
        let w = self.n_qubits * 3;
        &self.data[layer * w..(layer + 1) * w]
    }

    /// The first `depth` layers.
    pub fn truncated(&self, depth: usize) -> Result<Self, QnnError> {
        if depth > self.n_layers {
            return Err(QnnError::Argument(format!(
                "depth {depth} exceeds {} layers",
                self.n_layers
            )));
        }
        let w = self.n_qubits * 3;
        Ok(LayerWeights {
            n_layers: depth,
            n_qubits: self.n_qubits,
            data: self.data[..depth * w].to_vec(),
        })
    }
}

/// `logits = weights · z + bias`, weights row-major `[classes][inputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHead {
    n_classes: usize,
    n_inputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseHead {
    pub fn new(n_classes: usize, n_inputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self, QnnError> {
        if weights.len() != n_classes * n_inputs || bias.len() != n_classes {
            return Err(QnnError::Shape(format!(
                "head [{n_classes}][{n_inputs}] got {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(QnnError::Argument("head parameters must be finite".into()));
        }
        Ok(DenseHead {
            n_classes,
            n_inputs,
            weights,
            bias,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng>(n_classes: usize, n_inputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (n_classes + n_inputs) as f64).sqrt();
        let weights = (0..n_classes * n_inputs)
            .map(|_| rng.gen_range(-limit..=limit))
            .collect();
        DenseHead {
            n_classes,
            n_inputs,
            weights,
            bias: vec![0.0; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weight(&self, class: usize, input: usize) -> f64 {
        self.weights[class * self.n_inputs + input]
    }

    pub fn logits(&self, z: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.n_inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }
}

/// How a model was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub seed: u64,
    pub split: String,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub train_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnnModel {
    n_qubits: usize,
    layers: LayerWeights,
    head: DenseHead,
    class_labels: Vec<u8>,
    pub provenance: Option<Provenance>,
}

impl QnnModel {
    pub fn new(layers: LayerWeights, head: DenseHead, class_labels: Vec<u8>) -> Result<Self, QnnError> {
        let n_qubits = layers.n_qubits();
        if n_qubits == 0 {
            return Err(QnnError::Shape("model needs at least one qubit".into()));
        }
        if head.n_inputs() != n_qubits {
            return Err(QnnError::Shape(format!(
                "head reads {} inputs, circuit has {n_qubits} qubits",
                head.n_inputs()
            )));
        }
        if class_labels.len() != head.n_classes() {
            return Err(QnnError::Shape(format!(
                "{} class labels for a {}-way head",
                class_labels.len(),
                head.n_classes()
            )));
        }
        Ok(QnnModel {
            n_qubits,
            layers,
            head,
            class_labels,
            provenance: None,
        })
    }

    /// Layer angles uniform in `[0, 2π)`, Glorot head, zero bias; two
    /// independent streams of one seed.
    pub fn init(n_qubits: usize, n_layers: usize, class_labels: Vec<u8>, seed: u64) -> Result<Self, QnnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        let layers = LayerWeights::random_uniform(n_layers, n_qubits, &mut rng);
        rng.set_stream(1);
        let head = DenseHead::glorot(class_labels.len(), n_qubits, &mut rng);
        QnnModel::new(layers, head, class_labels)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.layers.n_layers()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn layers(&self) -> &LayerWeights {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut LayerWeights {
        &mut self.layers
    }

    pub fn head(&self) -> &DenseHead {
        &self.head
    }

    pub fn head_mut(&mut self) -> &mut DenseHead {
        &mut self.head
    }

    pub fn class_labels(&self) -> &[u8] {
        &self.class_labels
    }

    /// Total trainable parameters: layer angles, head weights, head bias.
    pub fn n_params(&self) -> usize {
        self.layers.data.len() + self.head.weights.len() + self.head.bias.len()
    }

    /// Parameters flattened in the order angles, head weights, head bias.
    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        v.extend_from_slice(&self.layers.data);
        v.extend_from_slice(&self.head.weights);
        v.extend_from_slice(&self.head.bias);
        v
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), QnnError> {
        if params.len() != self.n_params() {
            return Err(QnnError::Shape(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        let (a, rest) = params.split_at(self.layers.data.len());
        let (w, b) = rest.split_at(self.head.weights.len());
        self.layers.data.copy_from_slice(a);
        self.head.weights.copy_from_slice(w);
        self.head.bias.copy_from_slice(b);
        Ok(())
    }

    /// The variational part of the circuit, without state preparation.
    pub fn layers_circuit(&self) -> Circuit {
        layers_circuit(&self.layers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, QnnError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| QnnError::Format(e.to_string()))?;
        file.into_model()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), QnnError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| QnnError::Format(format!("{}: {e}", path.display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, QnnError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| QnnError::Format(format!("{}: {e}", path.display())))?;
        QnnModel::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadFile {
    weights: Tensor,
    bias: Tensor,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: String,
    n_qubits: usize,
    class_labels: Vec<u8>,
    layers: Tensor,
    head: HeadFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl From<&QnnModel> for ModelFile {
    fn from(m: &QnnModel) -> Self {
        ModelFile {
            version: MODEL_VERSION.into(),
            n_qubits: m.n_qubits,
            class_labels: m.class_labels.clone(),
            layers: Tensor {
                shape: vec![m.n_layers(), m.n_qubits, 3],
                data: m.layers.data.clone(),
            },
            head: HeadFile {
                weights: Tensor {
                    shape: vec![m.head.n_classes, m.head.n_inputs],
                    data: m.head.weights.clone(),
                },
                bias: Tensor {
                    shape: vec![m.head.n_classes],
                    data: m.head.bias.clone(),
                },
            },
            provenance: m.provenance.clone(),
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<QnnModel, QnnError> {
        if self.version != MODEL_VERSION {
            return Err(QnnError::Format(format!(
                "unsupported version {:?}, expected {MODEL_VERSION}",
                self.version
            )));
        }
        let [l, n, three] = self.layers.shape[..] else {
            return Err(QnnError::Format(format!(
                "layers shape {:?} is not rank 3",
                self.layers.shape
            )));
        };
        if three != 3 || n != self.n_qubits {
            return Err(QnnError::Format(format!(
                "layers shape {:?} does not match [L][{}][3]",
                self.layers.shape, self.n_qubits
            )));
        }
        let [k, inputs] = self.head.weights.shape[..] else {
            return Err(QnnError::Format(format!(
                "head weight shape {:?} is not rank 2",
                self.head.weights.shape
            )));
        };
        if self.head.bias.shape != [k] {
            return Err(QnnError::Format(format!(
                "bias shape {:?}, expected [{k}]",
                self.head.bias.shape
            )));
        }
        let layers = LayerWeights::new(l, n, self.layers.data)?;
        let head = DenseHead::new(k, inputs, self.head.weights.data, self.head.bias.data)?;
        let mut model = QnnModel::new(layers, head, self.class_labels)?;
        model.provenance = self.provenance;
        Ok(model)
    }
}

/// `Rot(params[q])` on every qubit, then CNOTs `(q, q+1 mod n)`. A single
/// qubit gets no CNOT; two qubits get only `(0, 1)`.
pub fn strongly_entangling_layer(params: &[f64], n_qubits: usize) -> Result<Vec<GateOp>, QnnError> {
    if n_qubits == 0 {
        return Err(QnnError::Shape("layer needs at least one qubit".into()));
    }
    if params.len() != n_qubits * 3 {
        return Err(QnnError::Shape(format!(
            "layer on {n_qubits} qubits needs {} angles, got {}",
            n_qubits * 3,
            params.len()
        )));
    }
    let mut ops: Vec<GateOp> = params
        .chunks_exact(3)
        .enumerate()
        .map(|(q, p)| GateOp::rot(q, p[0], p[1], p[2]))
        .collect();
    let n_cnots = match n_qubits {
        1 => 0,
        2 => 1,
        n => n,
    };
    ops.extend((0..n_cnots).map(|q| GateOp::cnot(q, (q + 1) % n_qubits)));
    Ok(ops)
}

pub fn layers_circuit(weights: &LayerWeights) -> Circuit {
    let n = weights.n_qubits();
    let mut c = Circuit::new(n);
    for l in 0..weights.n_layers() {
        let ops = strongly_entangling_layer(weights.layer(l), n).expect("layer block has the right shape");
        c.extend(ops).expect("ring gates stay in range");
    }
    c
}

/// Expectation values and class probabilities of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub expvals: Vec<f64>,
    pub probs: Vec<f64>,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn check_shots(shots: Option<u64>, seed: Option<u64>) -> Result<(), QnnError> {
    if shots.is_some() && seed.is_none() {
        return Err(QnnError::Argument("sampling with shots requires a seed".into()));
    }
    Ok(())
}

/// Per-qubit ⟨Z⟩, exact or estimated from `shots` samples.
pub fn readout_expvals(dist: &ProbDist, shots: Option<u64>, seed: Option<u64>) -> Result<Vec<f64>, QnnError> {
    check_shots(shots, seed)?;
    let n = dist.n_qubits();
    let dist = match (shots, seed) {
        (Some(shots), Some(seed)) => ProbDist::from_counts(n, &sample_counts(dist, shots, seed)?)?,
        _ => dist.clone(),
    };
    Ok((0..n).map(|q| dist.expect_z(q)).collect::<Result<_, _>>()?)
}

fn head_forward(model: &QnnModel, expvals: Vec<f64>) -> Forward {
    let probs = softmax(&model.head.logits(&expvals));
    Forward { expvals, probs }
}

fn check_input_width(model: &QnnModel, n_qubits: usize) -> Result<(), QnnError> {
    if n_qubits != model.n_qubits {
        return Err(QnnError::Shape(format!(
            "input is {n_qubits} qubits wide, model expects {}",
            model.n_qubits
        )));
    }
    Ok(())
}

/// Noise-free pass starting from an already prepared state.
pub fn forward_from_pure(
    prepared: &PureState,
    model: &QnnModel,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<Forward, QnnError> {
    check_input_width(model, prepared.n_qubits())?;
    check_shots(shots, seed)?;
    let mut psi = prepared.clone();
    psi.run(&model.layers_circuit())?;
    let expvals = match shots {
        None => (0..model.n_qubits).map(|q| psi.expect_z(q)).collect::<Result<_, _>>()?,
        Some(_) => readout_expvals(&psi.probabilities()?, shots, seed)?,
    };
    Ok(head_forward(model, expvals))
}

/// Noisy pass starting from a density matrix that already went through the
/// noisy preparation circuit.
pub fn forward_from_density(
    prepared: &DensityMatrix,
    model: &QnnModel,
    noise: &DeviceNoiseModel,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<Forward, QnnError> {
    check_input_width(model, prepared.n_qubits())?;
    check_shots(shots, seed)?;
    let noisy = insert_noise(&model.layers_circuit(), noise)?;
    let mut rho = prepared.clone();
    noisy.run(&mut rho)?;
    let expvals = readout_expvals(&noisy.measure(&rho)?, shots, seed)?;
    Ok(head_forward(model, expvals))
}

/// The amplitude-encoding circuit run through `noise`, from `|0…0⟩`.
pub fn noisy_prepared_state(input: &[f64], noise: &DeviceNoiseModel) -> Result<DensityMatrix, QnnError> {
    let prep = synthesize_prep(input)?;
    Ok(insert_noise(prep.circuit(), noise)?.simulate()?)
}

pub fn qnn_forward(
    input: &[f64],
    model: &QnnModel,
    noise: Option<&DeviceNoiseModel>,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<Forward, QnnError> {
    check_shots(shots, seed)?;
    match noise {
        None => forward_from_pure(&synthesize_prep(input)?.prepare()?, model, shots, seed),
        Some(noise) => forward_from_density(&noisy_prepared_state(input, noise)?, model, noise, shots, seed),
    }
}

/// Predicted class labels; item `i` samples with seed `seed ^ i`.
pub fn predict<I: AsRef<[f64]> + Sync>(
    inputs: &[I],
    model: &QnnModel,
    noise: Option<&DeviceNoiseModel>,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<Vec<u8>, QnnError> {
    if inputs.is_empty() {
        return Err(QnnError::Argument("cannot predict an empty batch".into()));
    }
    check_shots(shots, seed)?;
    inputs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let f = qnn_forward(x.as_ref(), model, noise, shots, seed.map(|s| s ^ i as u64))?;
            Ok(model.class_labels[argmax(&f.probs)])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateKind;

    fn unit(v: &[f64]) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }

    #[test]
    fn layer_shapes() {
        let ops = strongly_entangling_layer(&[0.0; 9], 3).unwrap();
        assert_eq!(ops.len(), 6);
        let pairs: Vec<_> = ops[3..].iter().map(|g| g.targets().to_vec()).collect();
        assert_eq!(pairs, vec![vec![0, 1], vec![1, 2], vec![2, 0]]);
        let single = strongly_entangling_layer(&[0.1, 0.2, 0.3], 1).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].params(), &[0.1, 0.2, 0.3]);
        assert_eq!(strongly_entangling_layer(&[0.0; 6], 2).unwrap().len(), 3);
        let eight = strongly_entangling_layer(&[0.0; 24], 8).unwrap();
        assert_eq!(eight.iter().filter(|g| g.kind() == GateKind::Rot).count(), 8);
        assert_eq!(eight.iter().filter(|g| g.kind() == GateKind::Cnot).count(), 8);
        assert!(strongly_entangling_layer(&[0.0; 5], 2).is_err());
    }

    #[test]
    fn zero_weights_on_basis_zero_give_plus_one() {
        let model = QnnModel::new(
            LayerWeights::zeros(1, 3),
            DenseHead::new(2, 3, vec![0.0; 6], vec![0.0; 2]).unwrap(),
            vec![0, 1],
        )
        .unwrap();
        let mut e0 = vec![0.0; 8];
        e0[0] = 1.0;
        let f = qnn_forward(&e0, &model, None, None, None).unwrap();
        assert!(f.expvals.iter().all(|z| (z - 1.0).abs() < 1e-12));
        assert_eq!(f.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_properties() {
        let p = softmax(&[1.0, -2.0, 0.5, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let q = softmax(&[1001.0, 998.0, 1000.5, 1003.0]);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn pure_and_density_paths_agree() {
        let model = QnnModel::init(3, 2, vec![0, 1, 2], 9).unwrap();
        let x = unit(&[0.1, 0.5, 0.0, 0.3, 0.9, 0.2, 0.4, 0.05]);
        let pure = qnn_forward(&x, &model, None, None, None).unwrap();
        let prep = synthesize_prep(&x).unwrap();
        let mut rho = DensityMatrix::new_zero_state(3).unwrap();
        rho.run(prep.circuit()).unwrap();
        rho.run(&model.layers_circuit()).unwrap();
        for (q, z) in pure.expvals.iter().enumerate() {
            assert!((z - rho.expect_z(q).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn shots_need_a_seed_and_converge() {
        let model = QnnModel::init(2, 1, vec![0, 1], 4).unwrap();
        let x = unit(&[0.3, 0.2, 0.8, 0.4]);
        assert!(matches!(
            qnn_forward(&x, &model, None, Some(10), None),
            Err(QnnError::Argument(_))
        ));
        let exact = qnn_forward(&x, &model, None, None, None).unwrap();
        let sampled = qnn_forward(&x, &model, None, Some(1_000_000), Some(77)).unwrap();
        for (e, s) in exact.expvals.iter().zip(&sampled.expvals) {
            // ⟨Z⟩ = 1 − 2p, so σ = 2·sqrt(p(1−p)/N) ≤ 1/sqrt(N)
            assert!((e - s).abs() < 5.0 / 1000.0);
        }
        assert_eq!(
            sampled,
            qnn_forward(&x, &model, None, Some(1_000_000), Some(77)).unwrap()
        );
    }

    #[test]
    fn predict_examples() {
        let head = DenseHead::new(2, 2, vec![1.0, 1.0, -1.0, -1.0], vec![0.0, 0.0]).unwrap();
        let model = QnnModel::new(LayerWeights::zeros(1, 2), head, vec![0, 1]).unwrap();
        let x = vec![1.0, 0.0, 0.0, 0.0];
        assert_eq!(
            predict(std::slice::from_ref(&x), &model, None, None, None).unwrap(),
            vec![0]
        );
        let batch = vec![unit(&[0.1, 0.2, 0.3, 0.9]); 5];
        let labels = predict(&batch, &model, None, Some(100), Some(3)).unwrap();
        assert!(labels.iter().all(|&l| l == labels[0]));
        assert!(predict::<Vec<f64>>(&[], &model, None, None, None).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut model = QnnModel::init(8, 3, (0..10).collect(), 123).unwrap();
        model.head_mut().bias_mut()[3] = -1.0 / 3.0;
        model.provenance = Some(Provenance {
            seed: 123,
            split: "0-9".into(),
            epochs: 4,
            learning_rate: 0.01,
            batch_size: 16,
            train_samples: 8000,
        });
        let text = model.to_json();
        let back = QnnModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), text);
        for (a, b) in back.params().iter().zip(model.params()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_malformed_model_files() {
        let model = QnnModel::init(2, 1, vec![0, 1], 0).unwrap();
        let good = model.to_json();
        assert!(QnnModel::from_json(&good.replace("qnnmodel/1", "qnnmodel/9")).is_err());
        assert!(QnnModel::from_json("{}").is_err());
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["layers"]["shape"] = serde_json::json!([1, 3, 3]);
        assert!(QnnModel::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn parameter_flattening_round_trips() {
        let mut model = QnnModel::init(3, 2, vec![0, 1], 5).unwrap();
        let p = model.params();
        assert_eq!(p.len(), 18 + 6 + 2);
        let shifted: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
        model.set_params(&shifted).unwrap();
        assert_eq!(model.params(), shifted);
        assert!(model.set_params(&p[1..]).is_err());
        assert_eq!(model.layers().truncated(1).unwrap().n_layers(), 1);
    }
}
