//! Kraus channels and classical readout confusion.

use crate::error::NoiseError;
use crate::gates::{qubit_mask, C64};
use crate::state::ProbDist;

const ZERO: C64 = C64::new(0.0, 0.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Known structure of a channel, used by the density-matrix simulator to
/// take a direct route instead of the generic Kraus sum. Both routes compute
/// the same map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelStructure {
    /// `rho -> (1 - p) rho + p tr_S(rho) (x) I / 2^arity`.
    Depolarizing {
        p: f64,
    },
    /// Amplitude damping `gamma` followed by phase damping `lambda`
    /// (single qubit).
    Relaxation {
        gamma: f64,
        lambda: f64,
    },
    General,
}

/// Completely-positive trace-preserving map given by its Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    kraus: Vec<Vec<C64>>,
    structure: ChannelStructure,
}

impl KrausChannel {
    /// Builds an unstructured channel, checking that `sum K^dagger K = I`
    /// within `1e-10`.
    pub fn new(arity: usize, kraus: Vec<Vec<C64>>) -> Result<Self, NoiseError> {
        if !(1..=2).contains(&arity) {
            return Err(NoiseError::Argument(format!(
                "channel arity must be 1 or 2, got {arity}"
            )));
        }
        if kraus.is_empty() {
            return Err(NoiseError::Argument("channel needs at least one Kraus operator".into()));
        }
        let dim = 1 << arity;
        if let Some(k) = kraus.iter().find(|k| k.len() != dim * dim) {
            return Err(NoiseError::Argument(format!(
                "Kraus operator has {} entries, expected {}",
                k.len(),
                dim * dim
            )));
        }
        let channel = Self {
            arity,
            kraus,
            structure: ChannelStructure::General,
        };
        let err = channel.completeness_error();
        if err > 1e-10 {
            return Err(NoiseError::Physicality(format!(
                "Kraus operators are not trace preserving (error {err:e})"
            )));
        }
        Ok(channel)
    }

    pub fn identity(arity: usize) -> Self {
        let dim = 1 << arity;
        let mut id = vec![ZERO; dim * dim];
        (0..dim).for_each(|i| id[i * dim + i] = re(1.0));
        Self {
            arity,
            kraus: vec![id],
            structure: ChannelStructure::General,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kraus(&self) -> &[Vec<C64>] {
        &self.kraus
    }

    pub fn structure(&self) -> ChannelStructure {
        self.structure
    }

    /// Same operators with the structure tag dropped, forcing the generic
    /// Kraus-sum route.
    pub fn as_general(&self) -> Self {
        Self {
            structure: ChannelStructure::General,
            ..self.clone()
        }
    }

    /// Largest elementwise deviation of `sum K^dagger K` from the identity.
    pub fn completeness_error(&self) -> f64 {
        let dim = 1 << self.arity;
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let s: C64 = self
                    .kraus
                    .iter()
                    .map(|k| (0..dim).map(|m| k[m * dim + i].conj() * k[m * dim + j]).sum::<C64>())
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - re(expected)).norm());
            }
        }
        worst
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::Argument(format!("{name} must lie in [0, 1], got {p}")))
    }
}

fn pauli(index: usize) -> [C64; 4] {
    match index {
        0 => [re(1.0), ZERO, ZERO, re(1.0)],
        1 => [ZERO, re(1.0), re(1.0), ZERO],
        2 => [ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
        _ => [re(1.0), ZERO, ZERO, re(-1.0)],
    }
}

fn kron_2x2(a: &[C64; 4], b: &[C64; 4]) -> Vec<C64> {
    let mut out = vec![ZERO; 16];
    for (r, c) in (0..4).flat_map(|r| (0..4).map(move |c| (r, c))) {
        out[r * 4 + c] = a[(r >> 1) * 2 + (c >> 1)] * b[(r & 1) * 2 + (c & 1)];
    }
    out
}

/// Replaces the target subsystem by the maximally mixed state with
/// probability `p`.
pub fn depolarizing(p: f64, arity: usize) -> Result<KrausChannel, NoiseError> {
    check_probability("depolarizing probability", p)?;
    let n_paulis = match arity {
        1 => 4,
        2 => 16,
        _ => {
            return Err(NoiseError::Argument(format!(
                "depolarizing arity must be 1 or 2, got {arity}"
            )))
        }
    };
    let w_identity = (1.0 - p + p / n_paulis as f64).sqrt();
    let w_other = (p / n_paulis as f64).sqrt();
    let mut kraus = Vec::with_capacity(n_paulis);
    for idx in 0..n_paulis {
        let w = re(if idx == 0 { w_identity } else { w_other });
        let m: Vec<C64> = if arity == 1 {
            pauli(idx).to_vec()
        } else {
            kron_2x2(&pauli(idx / 4), &pauli(idx % 4))
        };
        if idx > 0 && p == 0.0 {
            continue;
        }
        kraus.push(m.into_iter().map(|z| z * w).collect());
    }
    Ok(KrausChannel {
        arity,
        kraus,
        structure: ChannelStructure::Depolarizing { p },
    })
}

fn relaxation_kraus(gamma: f64, lambda: f64) -> Vec<Vec<C64>> {
    let ad = [
        [re(1.0), ZERO, ZERO, re((1.0 - gamma).sqrt())],
        [ZERO, re(gamma.sqrt()), ZERO, ZERO],
    ];
    let pd = [
        [re(1.0), ZERO, ZERO, re((1.0 - lambda).sqrt())],
        [ZERO, ZERO, ZERO, re(lambda.sqrt())],
    ];
    let mut kraus = Vec::with_capacity(4);
    for p in &pd {
        for a in &ad {
            let k = crate::gates::mul_2x2(p, a);
            if k.iter().any(|z| z.norm() > 0.0) {
                kraus.push(k.to_vec());
            }
        }
    }
    kraus
}

/// Decay of the excited state with probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel, NoiseError> {
    check_probability("damping gamma", gamma)?;
    Ok(KrausChannel {
        arity: 1,
        kraus: relaxation_kraus(gamma, 0.0),
        structure: ChannelStructure::Relaxation { gamma, lambda: 0.0 },
    })
}

/// Pure dephasing: off-diagonals scaled by `sqrt(1 - lambda)`.
pub fn phase_damping(lambda: f64) -> Result<KrausChannel, NoiseError> {
    check_probability("dephasing lambda", lambda)?;
    Ok(KrausChannel {
        arity: 1,
        kraus: relaxation_kraus(0.0, lambda),
        structure: ChannelStructure::Relaxation { gamma: 0.0, lambda },
    })
}

/// `(gamma, lambda)` of thermal relaxation over `duration_ns`, with
/// `gamma = 1 - exp(-t/T1)` and `lambda = 1 - exp(-t/T_phi)` where
/// `1/T_phi = 1/T2 - 1/(2 T1)`. Infinite times mean no decay.
pub fn relaxation_parameters(t1_us: f64, t2_us: f64, duration_ns: f64) -> Result<(f64, f64), NoiseError> {
    if !(t1_us > 0.0) || !(t2_us > 0.0) {
        return Err(NoiseError::Argument(format!(
            "T1 and T2 must be positive, got T1={t1_us} T2={t2_us}"
        )));
    }
    if !(duration_ns >= 0.0) || !duration_ns.is_finite() {
        return Err(NoiseError::Argument(format!(
            "duration must be finite and >= 0, got {duration_ns}"
        )));
    }
    if t2_us > 2.0 * t1_us {
        return Err(NoiseError::Physicality(format!(
            "T2 ({t2_us} us) exceeds 2*T1 ({} us)",
            2.0 * t1_us
        )));
    }
    let t_us = duration_ns * 1e-3;
    let gamma = -(-t_us / t1_us).exp_m1();
    let dephasing_rate = (1.0 / t2_us - 0.5 / t1_us).max(0.0);
    let lambda = -(-t_us * dephasing_rate).exp_m1();
    Ok((gamma, lambda))
}

/// Amplitude damping then pure dephasing over a gate of `duration_ns`.
/// Excited-state equilibrium population is zero.
pub fn thermal_relaxation(t1_us: f64, t2_us: f64, duration_ns: f64) -> Result<KrausChannel, NoiseError> {
    let (gamma, lambda) = relaxation_parameters(t1_us, t2_us, duration_ns)?;
    Ok(KrausChannel {
        arity: 1,
        kraus: relaxation_kraus(gamma, lambda),
        structure: ChannelStructure::Relaxation { gamma, lambda },
    })
}

/// Classical confusion of one qubit's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReadoutError {
    /// P(read 1 | prepared 0)
    pub p01: f64,
    /// P(read 0 | prepared 1)
    pub p10: f64,
}

/// Applies the product of per-qubit confusion matrices
/// `[[1 - p01, p10], [p01, 1 - p10]]` to a distribution.
pub fn apply_readout_error(dist: &ProbDist, calib: &[ReadoutError]) -> Result<ProbDist, NoiseError> {
    let n = dist.n_qubits();
    if calib.len() != n {
        return Err(NoiseError::Argument(format!(
            "readout calibration has {} entries for {n} qubits",
            calib.len()
        )));
    }
    for (q, c) in calib.iter().enumerate() {
        check_probability(&format!("readout p01 of qubit {q}"), c.p01)?;
        check_probability(&format!("readout p10 of qubit {q}"), c.p10)?;
    }
    let mut out = dist.clone();
    let probs = out.probs_mut();
    for (q, c) in calib.iter().enumerate() {
        if c.p01 == 0.0 && c.p10 == 0.0 {
            continue;
        }
        let mask = qubit_mask(n, q);
        for i in (0..probs.len()).filter(|i| i & mask == 0) {
            let (p0, p1) = (probs[i], probs[i | mask]);
            probs[i] = (1.0 - c.p01) * p0 + c.p10 * p1;
            probs[i | mask] = c.p01 * p0 + (1.0 - c.p10) * p1;
        }
    }
    Ok(out)
}
