//! Noise-aware simulation of amplitude-encoded quantum classifiers.
//!
//! The crate provides a dense state-vector and density-matrix simulator,
//! Kraus noise channels driven by device calibration files, amplitude
//! encoding by uniformly controlled rotations, a layered variational
//! classifier with a classical softmax head, and its noise-free training.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod dataset;
pub mod device;
pub mod error;
pub mod gates;
pub mod metrics;
pub mod mottonen;
pub mod noisy;
pub mod qnn;
pub mod state;
pub mod training;

pub use channels::{
    amplitude_damping, apply_readout_error, depolarizing, phase_damping, thermal_relaxation, KrausChannel, ReadoutError,
};
pub use dataset::{
    encode_all, encode_amplitudes, filter_split, load_mnist_dir, max_pool_2x2, parse_idx, EncodedSample, ImageSample,
    MnistPart, RawSample, Split,
};
pub use device::{load_device_model, DeviceNoiseModel, GateCalibration, QubitCalibration};
pub use error::{DatasetError, MetricsError, NoiseError, PrepError, QnnError, StateError, TrainError};
pub use gates::{Circuit, GateKind, GateOp, C64};
pub use metrics::{chi2_between, chi2_to_uniform, fidelity, fit_exponential_decay, total_variation, DecaySeries};
pub use mottonen::{compute_angle_tree, multiplexed_ry, synthesize_prep, AngleTree, PrepCircuit};
pub use noisy::{insert_noise, ChannelRole, NoisyCircuit, NoisyOp};
pub use qnn::{
    predict, qnn_forward, strongly_entangling_layer, DenseHead, Forward, LayerWeights, Provenance, QnnModel,
};
pub use state::{sample_counts, DensityMatrix, ProbDist, PureState, QuantumState, MAX_QUBITS};
pub use training::{
    adam_step, adjoint_gradients, cross_entropy, parameter_shift_gradient, train, AdamState, Gradients, ParamIndex,
    TrainConfig, TrainingLog,
};
