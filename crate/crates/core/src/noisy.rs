//! Rewriting ideal circuits into noisy ones.

use crate::channels::{apply_readout_error, depolarizing, thermal_relaxation, KrausChannel, ReadoutError};
use crate::device::DeviceNoiseModel;
use crate::error::{NoiseError, StateError};
use crate::gates::{Circuit, GateKind, GateOp, C64};
use crate::state::{DensityMatrix, ProbDist, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelRole {
    Relaxation,
    GateError,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoisyOp {
    Gate(GateOp),
    Channel {
        channel: KrausChannel,
        targets: Vec<usize>,
        role: ChannelRole,
    },
}

/// A circuit interleaved with noise channels, plus the readout confusion
/// applied to final probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyCircuit {
    n_qubits: usize,
    ops: Vec<NoisyOp>,
    readout: Vec<ReadoutError>,
}

impl NoisyCircuit {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[NoisyOp] {
        &self.ops
    }

    pub fn readout(&self) -> &[ReadoutError] {
        &self.readout
    }

    pub fn count_channels(&self, role: ChannelRole) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, NoisyOp::Channel { role: r, .. } if *r == role))
            .count()
    }

    /// Evolves `rho` through every gate and channel. Consecutive
    /// single-qubit operations on the same qubit are fused into one pass.
    pub fn run(&self, rho: &mut DensityMatrix) -> Result<(), StateError> {
        if rho.n_qubits() != self.n_qubits {
            return Err(StateError::Shape(format!(
                "noisy circuit has {} qubits, state has {}",
                self.n_qubits,
                rho.n_qubits()
            )));
        }
        let mut pending: Option<(usize, Superop)> = None;
        for op in &self.ops {
            let single = match op {
                NoisyOp::Gate(g) if g.targets().len() == 1 => Some((g.targets()[0], superop([g.matrix().as_slice()]))),
                NoisyOp::Channel { channel, targets, .. } if targets.len() == 1 => {
                    Some((targets[0], superop(channel.kraus().iter().map(Vec::as_slice))))
                }
                _ => None,
            };
            match (single, &mut pending) {
                (Some((q, s)), Some((pq, ps))) if *pq == q => *ps = compose(&s, ps),
                (Some(next), _) => {
                    if let Some((q, mut s)) = pending.replace(next) {
                        make_trace_preserving(&mut s);
                        rho.apply_superop_1q(q, &s);
                    }
                }
                (None, _) => {
                    if let Some((q, mut s)) = pending.take() {
                        make_trace_preserving(&mut s);
                        rho.apply_superop_1q(q, &s);
                    }
                    match op {
                        NoisyOp::Gate(g) => rho.apply_gate_in_place(g)?,
                        NoisyOp::Channel { channel, targets, .. } => rho.apply_channel(channel, targets)?,
                    }
                }
            }
        }
        if let Some((q, mut s)) = pending {
            make_trace_preserving(&mut s);
            rho.apply_superop_1q(q, &s);
        }
        Ok(())
    }

    /// Runs from `|0...0>`.
    pub fn simulate(&self) -> Result<DensityMatrix, StateError> {
        let mut rho = DensityMatrix::new_zero_state(self.n_qubits)?;
        self.run(&mut rho)?;
        Ok(rho)
    }

    /// Final-state distribution with readout confusion applied.
    pub fn measure(&self, rho: &DensityMatrix) -> Result<ProbDist, NoiseError> {
        apply_readout_error(&rho.probabilities()?, &self.readout)
    }
}

type Superop = [C64; 16];

/// `ρ ↦ Σ K ρ K†` for 2×2 Kraus operators, acting on `(ρ00, ρ01, ρ10, ρ11)`.
fn superop<'a>(kraus: impl IntoIterator<Item = &'a [C64]>) -> Superop {
    let mut s = [C64::new(0.0, 0.0); 16];
    for k in kraus {
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        s[(2 * i + j) * 4 + 2 * a + b] += k[2 * i + a] * k[2 * j + b].conj();
                    }
                }
            }
        }
    }
    s
}

/// Restores exact trace preservation lost to rounding: the `ρ11` output
/// row becomes `(1, 0, 0, 1)` minus the `ρ00` row. Without this the trace
/// drifts in one direction over thousands of fused passes.
fn make_trace_preserving(s: &mut Superop) {
    for j in 0..4 {
        let target = if j == 0 || j == 3 { 1.0 } else { 0.0 };
        s[12 + j] = C64::new(target, 0.0) - s[j];
    }
}

/// `later ∘ earlier`.
fn compose(later: &Superop, earlier: &Superop) -> Superop {
    let mut s = [C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        for j in 0..4 {
            s[4 * i + j] = (0..4).map(|k| later[4 * i + k] * earlier[4 * k + j]).sum();
        }
    }
    s
}

/// After every gate: thermal relaxation on each involved qubit for the
/// gate's duration, then a depolarizing channel with the gate's calibrated
/// error over the gate's full arity. Circuit qubit `i` runs on device qubit
/// `i`; no routing is attempted.
pub fn insert_noise(circuit: &Circuit, model: &DeviceNoiseModel) -> Result<NoisyCircuit, NoiseError> {
    let n = circuit.n_qubits();
    if n > model.n_qubits {
        return Err(NoiseError::Argument(format!(
            "circuit needs {n} qubits but device {} has {}",
            model.name, model.n_qubits
        )));
    }
    let mut ops = Vec::with_capacity(circuit.len() * 4);
    for (i, gate) in circuit.ops().iter().enumerate() {
        let targets = gate.targets();
        if gate.kind() == GateKind::Cnot && !model.is_coupled(targets[0], targets[1]) {
            return Err(NoiseError::Connectivity(format!(
                "op {i}: cnot on {targets:?} but the pair is not in the coupling map of {}",
                model.name
            )));
        }
        let calib = model.gate_calibration(gate.kind(), targets)?;
        let duration = gate.duration_ns().unwrap_or(calib.duration_ns);
        ops.push(NoisyOp::Gate(gate.clone()));
        for &q in targets {
            let qc = &model.qubits[q];
            ops.push(NoisyOp::Channel {
                channel: thermal_relaxation(qc.t1_us, qc.t2_us, duration)?,
                targets: vec![q],
                role: ChannelRole::Relaxation,
            });
        }
        ops.push(NoisyOp::Channel {
            channel: depolarizing(calib.error, targets.len())?,
            targets: targets.to_vec(),
            role: ChannelRole::GateError,
        });
    }
    Ok(NoisyCircuit {
        n_qubits: n,
        ops,
        readout: model.readout()[..n].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{GateCalibration, QubitCalibration};
    use crate::state::PureState;

    fn model(n: usize, cnot_error: f64, duration: f64, coupling: Vec<[usize; 2]>) -> DeviceNoiseModel {
        let qubits = vec![
            QubitCalibration {
                t1_us: 100.0,
                t2_us: 80.0,
                readout_p01: 0.0,
                readout_p10: 0.0
            };
            n
        ];
        let mut gates: Vec<GateCalibration> = GateKind::ALL
            .iter()
            .map(|&kind| GateCalibration {
                kind,
                qubits: vec![],
                error: 0.0,
                duration_ns: duration,
            })
            .collect();
        gates.push(GateCalibration {
            kind: GateKind::Cnot,
            qubits: vec![0, 1],
            error: cnot_error,
            duration_ns: duration,
        });
        let m = DeviceNoiseModel {
            name: "test".into(),
            n_qubits: n,
            qubits,
            gates,
            coupling_map: coupling,
        };
        m.validate().unwrap();
        m
    }

    #[test]
    fn zero_noise_model_matches_ideal_evolution() {
        let m = model(3, 0.0, 0.0, vec![[0, 1], [1, 2], [2, 0]]);
        let mut c = Circuit::new(3);
        c.extend([
            GateOp::h(0),
            GateOp::cnot(0, 1),
            GateOp::rot(2, 0.3, 1.0, -0.4),
            GateOp::cnot(1, 2),
            GateOp::rx(0, 0.7),
        ])
        .unwrap();
        let noisy = insert_noise(&c, &m).unwrap();
        let rho = noisy.simulate().unwrap();
        let mut psi = PureState::new_zero_state(3).unwrap();
        psi.run(&c).unwrap();
        let ideal = psi.to_density();
        for (a, b) in rho.entries().iter().zip(ideal.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn channel_counts_per_gate() {
        let m = model(3, 0.01, 50.0, vec![[0, 1], [1, 2]]);
        let mut c = Circuit::new(3);
        c.extend([GateOp::h(0), GateOp::cnot(0, 1), GateOp::cnot(2, 1), GateOp::ry(2, 0.1)])
            .unwrap();
        let noisy = insert_noise(&c, &m).unwrap();
        assert_eq!(noisy.count_channels(ChannelRole::Relaxation), 1 + 2 + 2 + 1);
        assert_eq!(noisy.count_channels(ChannelRole::GateError), 4);
        assert_eq!(noisy.ops().len(), 4 + 6 + 4);
        // relaxation precedes depolarizing after each gate
        assert!(matches!(noisy.ops()[0], NoisyOp::Gate(_)));
        assert!(matches!(
            noisy.ops()[1],
            NoisyOp::Channel {
                role: ChannelRole::Relaxation,
                ..
            }
        ));
        assert!(matches!(
            noisy.ops()[2],
            NoisyOp::Channel {
                role: ChannelRole::GateError,
                ..
            }
        ));
        assert_eq!(insert_noise(&c, &m).unwrap(), noisy);
    }

    #[test]
    fn faulty_cnot_fully_mixes_its_pair() {
        let m = model(2, 1.0, 0.0, vec![[0, 1]]);
        let mut c = Circuit::new(2);
        c.push(GateOp::cnot(0, 1)).unwrap();
        let noisy = insert_noise(&c, &m).unwrap();
        let dist = noisy.measure(&noisy.simulate().unwrap()).unwrap();
        assert!(dist.probs().iter().all(|p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn fused_run_matches_op_by_op() {
        let text =
            std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/example-midnoise.json")).unwrap();
        let m = DeviceNoiseModel::from_json_str(&text).unwrap();
        let mut c = Circuit::new(4);
        c.extend([
            GateOp::h(0),
            GateOp::ry(1, 0.4),
            GateOp::rot(1, 0.2, -0.9, 1.3),
            GateOp::cnot(0, 1),
            GateOp::rx(2, 2.1),
            GateOp::rz(2, -0.3),
            GateOp::cnot(2, 3),
            GateOp::x(3),
            GateOp::cnot(3, 0),
            GateOp::ry(0, 1.1),
        ])
        .unwrap();
        let noisy = insert_noise(&c, &m).unwrap();
        let fused = noisy.simulate().unwrap();
        let mut reference = DensityMatrix::new_zero_state(4).unwrap();
        for op in noisy.ops() {
            match op {
                NoisyOp::Gate(g) => reference.apply_gate_in_place(g).unwrap(),
                NoisyOp::Channel { channel, targets, .. } => reference.apply_kraus_sum(channel, targets),
            }
        }
        for (a, b) in fused.entries().iter().zip(reference.entries()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn uncoupled_cnot_is_a_connectivity_error() {
        let m = model(3, 0.0, 0.0, vec![[0, 1]]);
        let mut c = Circuit::new(3);
        c.push(GateOp::cnot(0, 2)).unwrap();
        assert!(matches!(insert_noise(&c, &m), Err(NoiseError::Connectivity(_))));
        let big = Circuit::new(4);
        assert!(insert_noise(&big, &m).is_err());
    }
}
