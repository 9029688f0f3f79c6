//! Dense pure-state and density-matrix simulation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{ChannelStructure, KrausChannel};
use crate::error::StateError;
use crate::gates::{qubit_mask, Circuit, GateKind, GateOp, C64};

/// Largest register the dense simulator accepts. A 12-qubit density matrix
/// is 4096 x 4096 complex entries (256 MiB).
pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-10;
const PROB_SUM_TOL: f64 = 1e-9;
const RENORM_SILENT: f64 = 1e-12;
const RENORM_LIMIT: f64 = 1e-6;

fn check_capacity(n_qubits: usize) -> Result<(), StateError> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(StateError::Capacity(n_qubits))
    }
}

fn check_qubit(qubit: usize, n_qubits: usize) -> Result<(), StateError> {
    if qubit < n_qubits {
        Ok(())
    } else {
        Err(StateError::Bounds { index: qubit, n_qubits })
    }
}

/// Operations shared by both state representations.
pub trait QuantumState: Clone {
    fn n_qubits(&self) -> usize;

    fn apply_gate_in_place(&mut self, op: &GateOp) -> Result<(), StateError>;

    /// Exact outcome distribution in the computational basis.
    fn probabilities(&self) -> Result<ProbDist, StateError>;

    /// `<Z_qubit>`, i.e. `P(bit = 0) - P(bit = 1)`.
    fn expect_z(&self, qubit: usize) -> Result<f64, StateError>;

    fn apply_gate(&self, op: &GateOp) -> Result<Self, StateError> {
        let mut out = self.clone();
        out.apply_gate_in_place(op)?;
        Ok(out)
    }

    fn run(&mut self, circuit: &Circuit) -> Result<(), StateError> {
        if circuit.n_qubits() != self.n_qubits() {
            return Err(StateError::Shape(format!(
                "circuit has {} qubits, state has {}",
                circuit.n_qubits(),
                self.n_qubits()
            )));
        }
        circuit.ops().iter().try_for_each(|op| self.apply_gate_in_place(op))
    }
}

// ---------------------------------------------------------------------------
// kernels

fn local_offsets(n_qubits: usize, targets: &[usize]) -> (usize, Vec<usize>) {
    let k = targets.len();
    let masks: Vec<usize> = targets.iter().map(|&t| qubit_mask(n_qubits, t)).collect();
    let offsets = (0..1usize << k)
        .map(|local| {
            (0..k)
                .filter(|t| local & (1 << (k - 1 - t)) != 0)
                .map(|t| masks[t])
                .sum()
        })
        .collect();
    (masks.iter().sum(), offsets)
}

/// `v <- M v` where `M` acts on `targets`.
pub(crate) fn apply_matrix_vec(v: &mut [C64], n_qubits: usize, targets: &[usize], m: &[C64]) {
    if targets.len() == 1 {
        let mask = qubit_mask(n_qubits, targets[0]);
        let (u0, u1, u2, u3) = (m[0], m[1], m[2], m[3]);
        for hi in (0..v.len()).step_by(2 * mask) {
            for i in hi..hi + mask {
                let a = v[i];
                let b = v[i + mask];
                v[i] = u0 * a + u1 * b;
                v[i + mask] = u2 * a + u3 * b;
            }
        }
        return;
    }
    let (tmask, offsets) = local_offsets(n_qubits, targets);
    let dim = offsets.len();
    let mut gathered = vec![C64::new(0.0, 0.0); dim];
    for base in (0..v.len()).filter(|i| i & tmask == 0) {
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = v[base + off];
        }
        for (row, off) in offsets.iter().enumerate() {
            v[base + off] = (0..dim).map(|col| m[row * dim + col] * gathered[col]).sum();
        }
    }
}

fn cnot_vec(v: &mut [C64], n_qubits: usize, control: usize, target: usize) {
    let cm = qubit_mask(n_qubits, control);
    let tm = qubit_mask(n_qubits, target);
    for i in 0..v.len() {
        if i & cm != 0 && i & tm == 0 {
            v.swap(i, i | tm);
        }
    }
}

fn conj_matrix(m: &[C64]) -> Vec<C64> {
    m.iter().map(|z| z.conj()).collect()
}

// ---------------------------------------------------------------------------
// pure states

/// State vector of `n_qubits` qubits with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new_zero_state(n_qubits: usize) -> Result<Self, StateError> {
        check_capacity(n_qubits)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, StateError> {
        let n_qubits = register_size(amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= NORM_TOL) {
            return Err(StateError::Argument(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self, StateError> {
        Self::from_amplitudes(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64, StateError> {
        if self.n_qubits != other.n_qubits {
            return Err(StateError::Shape(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Applies a dense matrix to the targets. The matrix need not be unitary;
    /// the adjoint sweep also applies gate derivatives.
    pub(crate) fn apply_matrix(&mut self, targets: &[usize], m: &[C64]) {
        apply_matrix_vec(&mut self.amps, self.n_qubits, targets, m);
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mut data = Vec::with_capacity(d * d);
        for r in 0..d {
            let ar = self.amps[r];
            data.extend(self.amps.iter().map(|ac| ar * ac.conj()));
        }
        DensityMatrix {
            n_qubits: self.n_qubits,
            data,
        }
    }
}

fn register_size(len: usize) -> Result<usize, StateError> {
    if len < 2 || !len.is_power_of_two() {
        return Err(StateError::Shape(format!("length {len} is not a power of two >= 2")));
    }
    let n = len.trailing_zeros() as usize;
    check_capacity(n)?;
    Ok(n)
}

impl QuantumState for PureState {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_gate_in_place(&mut self, op: &GateOp) -> Result<(), StateError> {
        op.check_bounds(self.n_qubits)?;
        match op.kind() {
            GateKind::Cnot => cnot_vec(&mut self.amps, self.n_qubits, op.targets()[0], op.targets()[1]),
            _ => apply_matrix_vec(&mut self.amps, self.n_qubits, op.targets(), &op.matrix()),
        }
        Ok(())
    }

    fn probabilities(&self) -> Result<ProbDist, StateError> {
        ProbDist::settle(self.n_qubits, self.amps.iter().map(|a| a.norm_sqr()).collect())
    }

    fn expect_z(&self, qubit: usize) -> Result<f64, StateError> {
        check_qubit(qubit, self.n_qubits)?;
        let mask = qubit_mask(self.n_qubits, qubit);
        let z = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum::<f64>();
        Ok(z.clamp(-1.0, 1.0))
    }
}

// ---------------------------------------------------------------------------
// density matrices

/// Row-major `2^n x 2^n` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn new_zero_state(n_qubits: usize) -> Result<Self, StateError> {
        Ok(PureState::new_zero_state(n_qubits)?.to_density())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, StateError> {
        check_capacity(n_qubits)?;
        let d = 1usize << n_qubits;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    /// Builds from raw row-major entries, checking Hermiticity and unit
    /// trace (positivity is not checked).
    pub fn from_entries(n_qubits: usize, data: Vec<C64>) -> Result<Self, StateError> {
        check_capacity(n_qubits)?;
        let d = 1usize << n_qubits;
        if data.len() != d * d {
            return Err(StateError::Shape(format!(
                "expected {} entries, got {}",
                d * d,
                data.len()
            )));
        }
        let rho = Self { n_qubits, data };
        if !rho.is_hermitian(NORM_TOL) {
            return Err(StateError::Argument("matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(StateError::Argument(format!("trace {tr} differs from 1")));
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // For Hermitian rho, tr(rho^2) = sum |rho_ij|^2.
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|r| (r..d).all(|c| (self.data[r * d + c] - self.data[c * d + r].conj()).norm() <= tol))
    }

    /// `rho <- M rho M^dagger` for an arbitrary (not necessarily unitary) `M`.
    pub(crate) fn conjugate_by(&mut self, targets: &[usize], m: &[C64]) {
        self.left_multiply(targets, m);
        let mc = conj_matrix(m);
        let d = self.dim();
        for row in self.data.chunks_exact_mut(d) {
            apply_matrix_vec(row, self.n_qubits, targets, &mc);
        }
    }

    fn left_multiply(&mut self, targets: &[usize], m: &[C64]) {
        let d = self.dim();
        if targets.len() == 1 {
            let mask = qubit_mask(self.n_qubits, targets[0]);
            let (u0, u1, u2, u3) = (m[0], m[1], m[2], m[3]);
            for hi in (0..d).step_by(2 * mask) {
                for r0 in hi..hi + mask {
                    let r1 = r0 + mask;
                    let (head, tail) = self.data.split_at_mut(r1 * d);
                    let row0 = &mut head[r0 * d..r0 * d + d];
                    let row1 = &mut tail[..d];
                    for (a, b) in row0.iter_mut().zip(row1.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = u0 * x + u1 * y;
                        *b = u2 * x + u3 * y;
                    }
                }
            }
            return;
        }
        let (tmask, offsets) = local_offsets(self.n_qubits, targets);
        let k = offsets.len();
        let mut gathered = vec![C64::new(0.0, 0.0); k];
        for base in (0..d).filter(|r| r & tmask == 0) {
            for c in 0..d {
                for (g, off) in gathered.iter_mut().zip(&offsets) {
                    *g = self.data[(base + off) * d + c];
                }
                for (row, off) in offsets.iter().enumerate() {
                    self.data[(base + off) * d + c] = (0..k).map(|col| m[row * k + col] * gathered[col]).sum();
                }
            }
        }
    }

    /// Applies a single-qubit superoperator `s`, row-major over the block
    /// vector `(ρ00, ρ01, ρ10, ρ11)` of `qubit`.
    pub(crate) fn apply_superop_1q(&mut self, qubit: usize, s: &[C64; 16]) {
        if s.iter().all(|z| z.im == 0.0) {
            let re: [f64; 16] = std::array::from_fn(|i| s[i].re);
            self.superop_pass(qubit, &re);
        } else {
            self.superop_pass(qubit, s);
        }
    }

    fn superop_pass<T>(&mut self, qubit: usize, s: &[T; 16])
    where
        T: Copy + std::ops::Mul<C64, Output = C64>,
    {
        let d = self.dim();
        let m = qubit_mask(self.n_qubits, qubit);
        let f =
            |i: usize, b: [C64; 4]| s[4 * i] * b[0] + s[4 * i + 1] * b[1] + s[4 * i + 2] * b[2] + s[4 * i + 3] * b[3];
        for pair in self.data.chunks_exact_mut(2 * m * d) {
            let (upper, lower) = pair.split_at_mut(m * d);
            for (row0, row1) in upper.chunks_exact_mut(d).zip(lower.chunks_exact_mut(d)) {
                for (blk0, blk1) in row0.chunks_exact_mut(2 * m).zip(row1.chunks_exact_mut(2 * m)) {
                    let (a0, a1) = blk0.split_at_mut(m);
                    let (b0, b1) = blk1.split_at_mut(m);
                    for (((x00, x01), x10), x11) in
                        a0.iter_mut().zip(a1.iter_mut()).zip(b0.iter_mut()).zip(b1.iter_mut())
                    {
                        let b = [*x00, *x01, *x10, *x11];
                        *x00 = f(0, b);
                        *x01 = f(1, b);
                        *x10 = f(2, b);
                        *x11 = f(3, b);
                    }
                }
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let d = self.dim();
        let cm = qubit_mask(self.n_qubits, control);
        let tm = qubit_mask(self.n_qubits, target);
        let flipped: Vec<usize> = (0..d).filter(|i| i & cm != 0 && i & tm == 0).collect();
        for &r in &flipped {
            let (head, tail) = self.data.split_at_mut((r | tm) * d);
            head[r * d..r * d + d].swap_with_slice(&mut tail[..d]);
        }
        for row in self.data.chunks_exact_mut(d) {
            for &i in &flipped {
                row.swap(i, i | tm);
            }
        }
    }

    /// `rho <- sum_k K_k rho K_k^dagger` on `targets`.
    pub fn apply_channel(&mut self, channel: &KrausChannel, targets: &[usize]) -> Result<(), StateError> {
        if channel.arity() != targets.len() {
            return Err(StateError::Shape(format!(
                "channel acts on {} qubit(s) but {} target(s) were given",
                channel.arity(),
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            check_qubit(t, self.n_qubits)?;
            if targets[..i].contains(&t) {
                return Err(StateError::Argument(format!("duplicate channel target {t}")));
            }
        }
        match channel.structure() {
            ChannelStructure::Depolarizing { p } => self.depolarize(targets, p),
            ChannelStructure::Relaxation { gamma, lambda } => self.relax(targets[0], gamma, lambda),
            ChannelStructure::General => self.apply_kraus_sum(channel, targets),
        }
        Ok(())
    }

    /// Reference path: explicit Kraus sum, used for unstructured channels.
    pub fn apply_kraus_sum(&mut self, channel: &KrausChannel, targets: &[usize]) {
        let mut acc = vec![C64::new(0.0, 0.0); self.data.len()];
        for k in channel.kraus() {
            let mut term = self.clone();
            term.conjugate_by(targets, k);
            for (a, t) in acc.iter_mut().zip(&term.data) {
                *a += t;
            }
        }
        self.data = acc;
    }

    /// `rho <- (1 - p) rho + p tr_S(rho) (x) I_S / 2^|S|`.
    fn depolarize(&mut self, targets: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let d = self.dim();
        let (tmask, offsets) = local_offsets(self.n_qubits, targets);
        let bases: Vec<usize> = (0..d).filter(|i| i & tmask == 0).collect();
        let mut traced = Vec::with_capacity(bases.len() * bases.len());
        for &r in &bases {
            for &c in &bases {
                traced.push(
                    offsets
                        .iter()
                        .map(|off| self.data[(r + off) * d + c + off])
                        .sum::<C64>(),
                );
            }
        }
        let keep = 1.0 - p;
        for x in &mut self.data {
            *x *= keep;
        }
        let mix = p / offsets.len() as f64;
        let mut t = traced.iter();
        for &r in &bases {
            for &c in &bases {
                let add = t.next().expect("one trace per base pair") * mix;
                for off in &offsets {
                    self.data[(r + off) * d + c + off] += add;
                }
            }
        }
    }

    /// Amplitude damping `gamma` followed by phase damping `lambda`.
    fn relax(&mut self, qubit: usize, gamma: f64, lambda: f64) {
        if gamma == 0.0 && lambda == 0.0 {
            return;
        }
        let d = self.dim();
        let m = qubit_mask(self.n_qubits, qubit);
        let decay = 1.0 - gamma;
        let coherence = ((1.0 - gamma) * (1.0 - lambda)).sqrt();
        for r in (0..d).filter(|r| r & m == 0) {
            let (r0, r1) = (r * d, (r | m) * d);
            for c in (0..d).filter(|c| c & m == 0) {
                let excited = self.data[r1 + (c | m)];
                self.data[r0 + c] += excited * gamma;
                self.data[r1 + (c | m)] = excited * decay;
                self.data[r0 + (c | m)] *= coherence;
                self.data[r1 + c] *= coherence;
            }
        }
    }
}

impl QuantumState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_gate_in_place(&mut self, op: &GateOp) -> Result<(), StateError> {
        op.check_bounds(self.n_qubits)?;
        match op.kind() {
            GateKind::Cnot => self.apply_cnot(op.targets()[0], op.targets()[1]),
            _ => self.conjugate_by(op.targets(), &op.matrix()),
        }
        Ok(())
    }

    fn probabilities(&self) -> Result<ProbDist, StateError> {
        let d = self.dim();
        ProbDist::settle(self.n_qubits, (0..d).map(|i| self.data[i * d + i].re).collect())
    }

    fn expect_z(&self, qubit: usize) -> Result<f64, StateError> {
        check_qubit(qubit, self.n_qubits)?;
        let d = self.dim();
        let mask = qubit_mask(self.n_qubits, qubit);
        let z = (0..d)
            .map(|i| {
                let p = self.data[i * d + i].re;
                if i & mask == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum::<f64>();
        Ok(z.clamp(-1.0, 1.0))
    }
}

// ---------------------------------------------------------------------------
// distributions and sampling

/// Probability distribution over the `2^n` computational basis outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    n_qubits: usize,
    probs: Vec<f64>,
}

impl ProbDist {
    /// Validates a caller-supplied distribution.
    pub fn new(probs: Vec<f64>) -> Result<Self, StateError> {
        let n_qubits = register_size(probs.len())?;
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
            return Err(StateError::Argument(format!("probability {i} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(StateError::Argument(format!("probabilities sum to {sum}")));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn uniform(n_qubits: usize) -> Result<Self, StateError> {
        check_capacity(n_qubits)?;
        let d = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            probs: vec![1.0 / d as f64; d],
        })
    }

    /// Clips negative rounding residue and renormalizes small drift; larger
    /// drift indicates a simulation bug and is rejected.
    pub(crate) fn settle(n_qubits: usize, mut probs: Vec<f64>) -> Result<Self, StateError> {
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(StateError::NumericalIntegrity { drift: f64::NAN });
        }
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        let drift = (sum - 1.0).abs();
        if drift >= RENORM_LIMIT {
            return Err(StateError::NumericalIntegrity { drift });
        }
        if drift > RENORM_SILENT {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self { n_qubits, probs })
    }

    /// Empirical distribution of sampled counts.
    pub fn from_counts(n_qubits: usize, counts: &BTreeMap<usize, u64>) -> Result<Self, StateError> {
        check_capacity(n_qubits)?;
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(StateError::Argument("no counts".into()));
        }
        let mut probs = vec![0.0; 1 << n_qubits];
        for (&i, &c) in counts {
            check_qubit_index(i, probs.len())?;
            probs[i] = c as f64 / total as f64;
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn expect_z(&self, qubit: usize) -> Result<f64, StateError> {
        check_qubit(qubit, self.n_qubits)?;
        let mask = qubit_mask(self.n_qubits, qubit);
        let z = self
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| if i & mask == 0 { p } else { -p })
            .sum::<f64>();
        Ok(z.clamp(-1.0, 1.0))
    }

    pub(crate) fn probs_mut(&mut self) -> &mut [f64] {
        &mut self.probs
    }
}

fn check_qubit_index(i: usize, len: usize) -> Result<(), StateError> {
    if i < len {
        Ok(())
    } else {
        Err(StateError::Argument(format!(
            "outcome {i} out of range for {len} outcomes"
        )))
    }
}

/// Draws `shots` outcomes from `dist`. Deterministic for a fixed seed.
pub fn sample_counts(dist: &ProbDist, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>, StateError> {
    if shots == 0 {
        return Err(StateError::Argument("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cdf: Vec<f64> = dist
        .probs
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let total = *cdf.last().expect("distribution is non-empty");
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    Ok(counts)
}
