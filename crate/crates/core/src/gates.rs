//! Gate vocabulary and circuits.
//!
//! Basis convention used throughout the crate: qubit 0 is the most
//! significant bit of a basis index. For an `n`-qubit register, qubit `q`
//! owns the bit `1 << (n - 1 - q)`. Multi-qubit gate matrices follow the same
//! rule locally: the first target is the most significant bit of the local
//! index.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::StateError;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit mask of `qubit` in an `n_qubits` register.
#[inline]
pub fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Rot,
    H,
    X,
    Cnot,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Rot,
        GateKind::H,
        GateKind::X,
        GateKind::Cnot,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rot => 3,
            GateKind::H | GateKind::X | GateKind::Cnot => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Rot => "rot",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Cnot => "cnot",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A single gate application. Targets and parameter counts are validated at
/// construction; register bounds are checked when the gate is applied or
/// pushed onto a [`Circuit`].
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    kind: GateKind,
    targets: Vec<usize>,
    params: Vec<f64>,
    duration_ns: Option<f64>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: Vec<usize>, params: Vec<f64>) -> Result<Self, StateError> {
        if targets.len() != kind.arity() {
            return Err(StateError::InvalidGate(format!(
                "{kind} acts on {} qubit(s), got {} target(s)",
                kind.arity(),
                targets.len()
            )));
        }
        if params.len() != kind.n_params() {
            return Err(StateError::InvalidGate(format!(
                "{kind} takes {} parameter(s), got {}",
                kind.n_params(),
                params.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(StateError::InvalidGate(format!(
                "{kind} targets must be distinct, got {targets:?}"
            )));
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(StateError::InvalidGate(format!("{kind} parameter {p} is not finite")));
        }
        Ok(Self {
            kind,
            targets,
            params,
            duration_ns: None,
        })
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Rx,
            targets: vec![q],
            params: vec![theta],
            duration_ns: None,
        }
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Ry,
            targets: vec![q],
            params: vec![theta],
            duration_ns: None,
        }
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self {
            kind: GateKind::Rz,
            targets: vec![q],
            params: vec![theta],
            duration_ns: None,
        }
    }

    /// `Rot(phi, theta, omega) = RZ(omega) · RY(theta) · RZ(phi)`.
    pub fn rot(q: usize, phi: f64, theta: f64, omega: f64) -> Self {
        Self {
            kind: GateKind::Rot,
            targets: vec![q],
            params: vec![phi, theta, omega],
            duration_ns: None,
        }
    }

    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H,
            targets: vec![q],
            params: vec![],
            duration_ns: None,
        }
    }

    pub fn x(q: usize) -> Self {
        Self {
            kind: GateKind::X,
            targets: vec![q],
            params: vec![],
            duration_ns: None,
        }
    }

    /// # Panics
    /// If `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target, "CNOT control and target must differ");
        Self {
            kind: GateKind::Cnot,
            targets: vec![control, target],
            params: vec![],
            duration_ns: None,
        }
    }

    pub fn with_duration_ns(mut self, duration_ns: f64) -> Self {
        self.duration_ns = Some(duration_ns);
        self
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn duration_ns(&self) -> Option<f64> {
        self.duration_ns
    }

    pub fn check_bounds(&self, n_qubits: usize) -> Result<(), StateError> {
        match self.targets.iter().find(|&&t| t >= n_qubits) {
            Some(&index) => Err(StateError::Bounds { index, n_qubits }),
            None => Ok(()),
        }
    }

    /// 2x2 matrix for single-qubit kinds, `None` for CNOT.
    pub fn matrix_1q(&self) -> Option<[C64; 4]> {
        let p = &self.params;
        Some(match self.kind {
            GateKind::Rx => rx_matrix(p[0]),
            GateKind::Ry => ry_matrix(p[0]),
            GateKind::Rz => rz_matrix(p[0]),
            GateKind::Rot => mul_2x2(&rz_matrix(p[2]), &mul_2x2(&ry_matrix(p[1]), &rz_matrix(p[0]))),
            GateKind::H => {
                let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [s, s, s, -s]
            }
            GateKind::X => [ZERO, ONE, ONE, ZERO],
            GateKind::Cnot => return None,
        })
    }

    /// Dense row-major `2^arity x 2^arity` matrix.
    pub fn matrix(&self) -> Vec<C64> {
        match self.matrix_1q() {
            Some(m) => m.to_vec(),
            None => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = ONE;
                m[11] = ONE;
                m[14] = ONE;
                m
            }
        }
    }
}

pub fn rx_matrix(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)]
}

pub fn ry_matrix(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]
}

pub fn rz_matrix(theta: f64) -> [C64; 4] {
    let half = theta / 2.0;
    [C64::from_polar(1.0, -half), ZERO, ZERO, C64::from_polar(1.0, half)]
}

pub fn mul_2x2(a: &[C64; 4], b: &[C64; 4]) -> [C64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
        }
    }

    pub fn from_ops(n_qubits: usize, ops: Vec<GateOp>) -> Result<Self, StateError> {
        let mut c = Self::new(n_qubits);
        c.extend(ops)?;
        Ok(c)
    }

    pub fn push(&mut self, op: GateOp) -> Result<(), StateError> {
        op.check_bounds(self.n_qubits)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = GateOp>) -> Result<(), StateError> {
        ops.into_iter().try_for_each(|op| self.push(op))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dagger_times(m: &[C64], dim: usize) -> Vec<C64> {
        let mut out = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] = (0..dim).map(|k| m[k * dim + i].conj() * m[k * dim + j]).sum();
            }
        }
        out
    }

    #[test]
    fn every_kind_is_unitary() {
        let ops = [
            GateOp::rx(0, 0.3),
            GateOp::ry(0, -1.7),
            GateOp::rz(0, 2.9),
            GateOp::rot(0, 0.4, 1.1, -2.2),
            GateOp::h(0),
            GateOp::x(0),
            GateOp::cnot(0, 1),
        ];
        for op in ops {
            let dim = 1 << op.kind().arity();
            let prod = dagger_times(&op.matrix(), dim);
            for i in 0..dim {
                for j in 0..dim {
                    let expected = if i == j { ONE } else { ZERO };
                    assert!((prod[i * dim + j] - expected).norm() < 1e-12, "{op:?}");
                }
            }
        }
    }

    #[test]
    fn rot_is_zyz_product() {
        let (phi, theta, omega) = (0.3, 1.2, -0.8);
        let rot = GateOp::rot(0, phi, theta, omega).matrix_1q().unwrap();
        let manual = mul_2x2(&rz_matrix(omega), &mul_2x2(&ry_matrix(theta), &rz_matrix(phi)));
        for (a, b) in rot.iter().zip(manual.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn constructor_validates_shape() {
        assert!(GateOp::new(GateKind::Rx, vec![0], vec![]).is_err());
        assert!(GateOp::new(GateKind::Rot, vec![0], vec![1.0, 2.0, 3.0]).is_ok());
        assert!(GateOp::new(GateKind::Cnot, vec![1, 1], vec![]).is_err());
        assert!(GateOp::new(GateKind::H, vec![0, 1], vec![]).is_err());
        assert!(GateOp::new(GateKind::Ry, vec![0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn circuit_rejects_out_of_range_targets() {
        let mut c = Circuit::new(2);
        assert!(c.push(GateOp::cnot(0, 1)).is_ok());
        assert!(matches!(
            c.push(GateOp::h(2)),
            Err(StateError::Bounds { index: 2, n_qubits: 2 })
        ));
        assert_eq!(c.len(), 1);
    }
}
