//! Device calibration files.
//!
//! A calibration file is JSON with explicit units in the field names:
//!
//! ```json
//! {"name": "example", "n_qubits": 2,
//!  "qubits": [{"t1_us": 100, "t2_us": 80, "readout_p01": 0.01, "readout_p10": 0.02}, ...],
//!  "gates": [{"kind": "cnot", "qubits": [0, 1], "error": 0.01, "duration_ns": 300},
//!            {"kind": "ry", "qubits": [], "error": 0.001, "duration_ns": 35.5}],
//!  "coupling_map": [[0, 1]]}
//! ```
//!
//! A gate entry with empty `qubits` is the default for its kind.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::ReadoutError;
use crate::error::NoiseError;
use crate::gates::GateKind;
use crate::state::MAX_QUBITS;

fn infinite() -> f64 {
    f64::INFINITY
}

fn is_infinite(v: &f64) -> bool {
    v.is_infinite()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitCalibration {
    /// Absent in the file means infinite.
    #[serde(default = "infinite", skip_serializing_if = "is_infinite")]
    pub t1_us: f64,
    #[serde(default = "infinite", skip_serializing_if = "is_infinite")]
    pub t2_us: f64,
    /// P(read 1 | prepared 0)
    pub readout_p01: f64,
    /// P(read 0 | prepared 1)
    pub readout_p10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateCalibration {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub error: f64,
    pub duration_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceNoiseModel {
    pub name: String,
    pub n_qubits: usize,
    pub qubits: Vec<QubitCalibration>,
    pub gates: Vec<GateCalibration>,
    pub coupling_map: Vec<[usize; 2]>,
}

fn unit_interval(field: String, v: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(NoiseError::Schema(format!("{field}: {v} is outside [0, 1]")))
    }
}

impl DeviceNoiseModel {
    pub fn from_json_str(text: &str) -> Result<Self, NoiseError> {
        let model: Self = serde_json::from_str(text).map_err(|e| NoiseError::Schema(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration models serialize")
    }

    /// Checks every invariant of the model, naming the offending field.
    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(NoiseError::Schema(format!(
                "n_qubits: {} is outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.qubits.len() != self.n_qubits {
            return Err(NoiseError::Schema(format!(
                "qubits: expected {} entries, got {}",
                self.n_qubits,
                self.qubits.len()
            )));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if !(q.t1_us > 0.0) {
                return Err(NoiseError::Schema(format!(
                    "qubits[{i}].t1_us: must be positive, got {}",
                    q.t1_us
                )));
            }
            if !(q.t2_us > 0.0) {
                return Err(NoiseError::Schema(format!(
                    "qubits[{i}].t2_us: must be positive, got {}",
                    q.t2_us
                )));
            }
            if q.t2_us > 2.0 * q.t1_us {
                return Err(NoiseError::Physicality(format!(
                    "qubits[{i}].t2_us: {} exceeds 2*t1_us = {}",
                    q.t2_us,
                    2.0 * q.t1_us
                )));
            }
            unit_interval(format!("qubits[{i}].readout_p01"), q.readout_p01)?;
            unit_interval(format!("qubits[{i}].readout_p10"), q.readout_p10)?;
        }
        for (i, &[a, b]) in self.coupling_map.iter().enumerate() {
            if a >= self.n_qubits || b >= self.n_qubits || a == b {
                return Err(NoiseError::Schema(format!(
                    "coupling_map[{i}]: [{a}, {b}] is not a pair of distinct qubits below {}",
                    self.n_qubits
                )));
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            unit_interval(format!("gates[{i}].error"), g.error)?;
            if !(g.duration_ns >= 0.0) || !g.duration_ns.is_finite() {
                return Err(NoiseError::Schema(format!(
                    "gates[{i}].duration_ns: invalid value {}",
                    g.duration_ns
                )));
            }
            if g.qubits.is_empty() {
                continue;
            }
            if g.qubits.len() != g.kind.arity() {
                return Err(NoiseError::Schema(format!(
                    "gates[{i}].qubits: {} acts on {} qubit(s), got {:?}",
                    g.kind,
                    g.kind.arity(),
                    g.qubits
                )));
            }
            if let Some(q) = g.qubits.iter().find(|&&q| q >= self.n_qubits) {
                return Err(NoiseError::Schema(format!("gates[{i}].qubits: qubit {q} out of range")));
            }
            if g.qubits.len() == 2 && !self.is_coupled(g.qubits[0], g.qubits[1]) {
                return Err(NoiseError::Schema(format!(
                    "gates[{i}].qubits: pair {:?} is not in coupling_map",
                    g.qubits
                )));
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            if self.gates[..i].iter().any(|h| h.kind == g.kind && h.qubits == g.qubits) {
                return Err(NoiseError::Schema(format!(
                    "gates[{i}]: duplicate entry for {} on {:?}",
                    g.kind, g.qubits
                )));
            }
        }
        Ok(())
    }

    /// Connectivity is orientation-agnostic: a listed `[a, b]` allows a
    /// two-qubit gate in either direction.
    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.coupling_map
            .iter()
            .any(|&[x, y]| (x, y) == (a, b) || (x, y) == (b, a))
    }

    /// Calibration of `kind` on `qubits`, falling back to the kind's default
    /// entry.
    pub fn gate_calibration(&self, kind: GateKind, qubits: &[usize]) -> Result<&GateCalibration, NoiseError> {
        self.gates
            .iter()
            .find(|g| g.kind == kind && g.qubits == qubits)
            .or_else(|| self.gates.iter().find(|g| g.kind == kind && g.qubits.is_empty()))
            .ok_or_else(|| {
                NoiseError::Schema(format!(
                    "gates: no calibration for {kind} on {qubits:?} and no default {kind} entry"
                ))
            })
    }

    pub fn readout(&self) -> Vec<ReadoutError> {
        self.qubits
            .iter()
            .map(|q| ReadoutError {
                p01: q.readout_p01,
                p10: q.readout_p10,
            })
            .collect()
    }

    /// Scales every noise source by `factor`: gate errors and readout
    /// probabilities multiply (capped at 1), relaxation rates multiply
    /// (`T1`, `T2` divide). A factor of 0 yields a noise-free model.
    pub fn scaled(&self, factor: f64) -> Result<Self, NoiseError> {
        if !(factor >= 0.0) || !factor.is_finite() {
            return Err(NoiseError::Argument(format!(
                "noise scale must be finite and >= 0, got {factor}"
            )));
        }
        let mut out = self.clone();
        if factor != 1.0 {
            out.name = format!("{}@{factor}", self.name);
        }
        for q in &mut out.qubits {
            q.t1_us /= factor;
            q.t2_us /= factor;
            q.readout_p01 = (q.readout_p01 * factor).min(1.0);
            q.readout_p10 = (q.readout_p10 * factor).min(1.0);
        }
        for g in &mut out.gates {
            g.error = (g.error * factor).min(1.0);
        }
        Ok(out)
    }
}

pub fn load_device_model(path: impl AsRef<Path>) -> Result<DeviceNoiseModel, NoiseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| NoiseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    DeviceNoiseModel::from_json_str(&text)
}
