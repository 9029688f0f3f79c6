//! Amplitude encoding of non-negative real vectors.
//!
//! Level `k` of the construction rotates qubit `k` with an RY whose angle is
//! selected by the value of qubits `0..k` (a uniformly controlled rotation).
//! Each uniformly controlled rotation is lowered to alternating RY and CNOT
//! gates following a Gray-code walk over the control values, so the full
//! circuit for `n` qubits has `2^n - 1` RY gates and `2^n - 2` CNOTs. CNOTs
//! always target the qubit of the current level and are controlled by one
//! of the earlier qubits.
//!
//! Only the magnitude stage is built; inputs must be non-negative.

use crate::error::PrepError;
use crate::gates::{Circuit, GateKind, GateOp};
use crate::state::{PureState, MAX_QUBITS};

const NORM_TOL: f64 = 1e-9;

/// Rotation angles per level; level `k` holds `2^k` angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTree {
    levels: Vec<Vec<f64>>,
}

impl AngleTree {
    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn n_qubits(&self) -> usize {
        self.levels.len()
    }
}

/// Gate sequence preparing a target state from `|0...0>`; contains only RY
/// and CNOT.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepCircuit {
    circuit: Circuit,
}

impl PrepCircuit {
    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn ops(&self) -> &[GateOp] {
        self.circuit.ops()
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn into_circuit(self) -> Circuit {
        self.circuit
    }

    /// Noise-free state-vector evaluation from `|0...0>`.
    pub fn prepare(&self) -> Result<PureState, PrepError> {
        use crate::state::QuantumState;
        let mut psi = PureState::new_zero_state(self.n_qubits())?;
        psi.run(&self.circuit)?;
        Ok(psi)
    }
}

fn validate(amplitudes: &[f64]) -> Result<usize, PrepError> {
    let len = amplitudes.len();
    if len < 2 || !len.is_power_of_two() || len.trailing_zeros() as usize > MAX_QUBITS {
        return Err(PrepError::Length(len));
    }
    if let Some((index, &value)) = amplitudes
        .iter()
        .enumerate()
        .find(|(_, a)| !(**a >= 0.0) || !a.is_finite())
    {
        return Err(PrepError::Domain { index, value });
    }
    let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(PrepError::Normalization(norm));
    }
    Ok(len.trailing_zeros() as usize)
}

fn block_norm(block: &[f64]) -> f64 {
    block.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Level-`k` angle `j` is `2 asin(r_right / r_parent)`, where `r_parent` is
/// the norm of the `j`-th block of `2^(n-k)` amplitudes and `r_right` the
/// norm of its upper half. Empty blocks get angle 0.
pub fn compute_angle_tree(amplitudes: &[f64]) -> Result<AngleTree, PrepError> {
    let n = validate(amplitudes)?;
    let levels = (0..n)
        .map(|k| {
            let block = 1usize << (n - k);
            amplitudes
                .chunks_exact(block)
                .map(|b| {
                    let (left, right) = b.split_at(block / 2);
                    let (r_left, r_right) = (block_norm(left), block_norm(right));
                    if r_left == 0.0 && r_right == 0.0 {
                        0.0
                    } else {
                        // equals 2 asin(r_right / r_parent), without the loss of
                        // precision asin has near 1
                        2.0 * r_right.atan2(r_left)
                    }
                })
                .collect()
        })
        .collect();
    Ok(AngleTree { levels })
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Uniformly controlled RY: applies `RY(angles[c])` to `target` when the
/// controls (first control = most significant bit) hold the value `c`.
///
/// Lowered to `2^k` RY gates with rotated angles `M theta`,
/// `M_ij = 2^-k (-1)^(j . g_i)` with `g_i` the `i`-th Gray code, each
/// followed by a CNOT from the control whose bit flips between `g_i` and
/// `g_(i+1)`. The last CNOT closes the walk back to `g_0`.
pub fn multiplexed_ry(angles: &[f64], controls: &[usize], target: usize) -> Result<Vec<GateOp>, PrepError> {
    let k = controls.len();
    if angles.len() != 1usize << k {
        return Err(PrepError::Shape(format!(
            "{} angles for {k} control(s), expected {}",
            angles.len(),
            1usize << k
        )));
    }
    if controls.contains(&target) {
        return Err(PrepError::Shape(format!("target {target} is also a control")));
    }
    if k == 0 {
        return Ok(vec![GateOp::ry(target, angles[0])]);
    }
    let size = 1usize << k;
    let scale = 1.0 / size as f64;
    let mut ops = Vec::with_capacity(2 * size);
    for i in 0..size {
        let g = gray(i);
        let theta: f64 = angles
            .iter()
            .enumerate()
            .map(|(j, &a)| if (j & g).count_ones().is_multiple_of(2) { a } else { -a })
            .sum::<f64>()
            * scale;
        ops.push(GateOp::ry(target, theta));
        let flipped = g ^ gray((i + 1) % size);
        let bit = flipped.trailing_zeros() as usize;
        ops.push(GateOp::cnot(controls[k - 1 - bit], target));
    }
    Ok(ops)
}

/// Circuit preparing `sum_i amplitudes[i] |i>` from `|0...0>`.
pub fn synthesize_prep(amplitudes: &[f64]) -> Result<PrepCircuit, PrepError> {
    let tree = compute_angle_tree(amplitudes)?;
    let n = tree.n_qubits();
    let mut circuit = Circuit::new(n);
    let controls: Vec<usize> = (0..n).collect();
    for (k, level) in tree.levels.iter().enumerate() {
        circuit.extend(multiplexed_ry(level, &controls[..k], k)?)?;
    }
    debug_assert!(circuit
        .ops()
        .iter()
        .all(|op| matches!(op.kind(), GateKind::Ry | GateKind::Cnot)));
    Ok(PrepCircuit { circuit })
}
