use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("qubit count {0} outside supported range 1..=12")]
    Capacity(usize),
    #[error("qubit index {index} out of bounds for a {n_qubits}-qubit register")]
    Bounds { index: usize, n_qubits: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("probability drift {drift:e} exceeds the renormalization limit")]
    NumericalIntegrity { drift: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("unphysical parameters: {0}")]
    Physicality(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("connectivity error: {0}")]
    Connectivity(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Error)]
pub enum PrepError {
    #[error("amplitude vector length {0} is not a power of two >= 2")]
    Length(usize),
    #[error("amplitude {index} is {value}; only finite non-negative amplitudes are supported")]
    Domain { index: usize, value: f64 },
    #[error("amplitude vector has norm {0}, expected 1")]
    Normalization(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Error)]
pub enum QnnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Prep(#[from] PrepError),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("parameter index out of range: {0}")]
    Index(String),
    #[error("parameter-shift rule does not apply to {0}")]
    Domain(String),
    #[error("adjoint differentiation requires noise-free unitary evolution")]
    UnsupportedMode,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Qnn(#[from] QnnError),
}

impl From<StateError> for TrainError {
    fn from(e: StateError) -> Self {
        TrainError::Qnn(QnnError::State(e))
    }
}

impl From<PrepError> for TrainError {
    fn from(e: PrepError) -> Self {
        TrainError::Qnn(QnnError::Prep(e))
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad IDX magic 0x{found:08x}, expected 0x{expected:08x}")]
    Magic { expected: u32, found: u32 },
    #[error("truncated IDX payload: {0}")]
    Truncated(String),
    #[error("image/label count mismatch: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("wrong image shape: {0}")]
    Shape(String),
    #[error("cannot encode an all-zero image")]
    ZeroImage,
    #[error("unknown class split {0:?} (expected 0-1, 0-3 or 0-9)")]
    UnknownSplit(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("decay fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("decay fit needs strictly positive values, got {value} at layer {layer}")]
    Domain { layer: u32, value: f64 },
    #[error("layer indices must be strictly increasing")]
    Ordering,
}
