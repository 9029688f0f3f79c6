//! Distances between distributions, state fidelity and decay fitting.

use crate::error::MetricsError;
use crate::gates::C64;
use crate::state::{DensityMatrix, ProbDist, PureState};

/// Smoothing added to reference probabilities in [`chi2_between`].
pub const CHI2_EPS: f64 = 1e-12;

/// Values below this are treated as converged when fitting a decay.
pub const DECAY_FLOOR: f64 = 1e-9;

/// `Σ (p_i − u)² / u` with `u = 2^-n`.
pub fn chi2_to_uniform(dist: &ProbDist) -> f64 {
    let u = 1.0 / dist.len() as f64;
    dist.probs().iter().map(|p| (p - u) * (p - u)).sum::<f64>() / u
}

/// `Σ (p_i − r_i)² / (r_i + ε)`. Not symmetric in its arguments.
pub fn chi2_between(dist: &ProbDist, reference: &ProbDist) -> Result<f64, MetricsError> {
    check_dims(dist, reference)?;
    Ok(dist
        .probs()
        .iter()
        .zip(reference.probs())
        .map(|(p, r)| (p - r) * (p - r) / (r + CHI2_EPS))
        .sum())
}

pub fn total_variation(dist: &ProbDist, reference: &ProbDist) -> Result<f64, MetricsError> {
    check_dims(dist, reference)?;
    Ok(0.5
        * dist
            .probs()
            .iter()
            .zip(reference.probs())
            .map(|(p, r)| (p - r).abs())
            .sum::<f64>())
}

fn check_dims(a: &ProbDist, b: &ProbDist) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::Dimension(a.len(), b.len()));
    }
    Ok(())
}

/// `⟨ψ|ρ|ψ⟩`, clipped into `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64, MetricsError> {
    let dim = rho.dim();
    let psi = target.amplitudes();
    if psi.len() != dim {
        return Err(MetricsError::Dimension(dim, psi.len()));
    }
    let entries = rho.entries();
    let mut acc = C64::new(0.0, 0.0);
    for (r, row) in entries.chunks_exact(dim).enumerate() {
        let row_dot: C64 = row.iter().zip(psi).map(|(a, b)| a * b).sum();
        acc += psi[r].conj() * row_dot;
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// A metric recorded per circuit depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    layer_index: Vec<u32>,
    value: Vec<f64>,
    pub fitted_rate: Option<f64>,
    pub fit_r2: Option<f64>,
}

impl DecaySeries {
    pub fn new(layer_index: Vec<u32>, value: Vec<f64>) -> Result<Self, MetricsError> {
        if layer_index.len() != value.len() {
            return Err(MetricsError::Dimension(layer_index.len(), value.len()));
        }
        if layer_index.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MetricsError::Ordering);
        }
        Ok(DecaySeries {
            layer_index,
            value,
            fitted_rate: None,
            fit_r2: None,
        })
    }

    pub fn layer_index(&self) -> &[u32] {
        &self.layer_index
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    /// The prefix before the first value below `floor`.
    pub fn pre_floor(&self, floor: f64) -> DecaySeries {
        let end = self.value.iter().position(|&v| v < floor).unwrap_or(self.value.len());
        DecaySeries::new(self.layer_index[..end].to_vec(), self.value[..end].to_vec())
            .expect("prefix of a valid series")
    }

    /// Number of steps where the value increases.
    pub fn monotonicity_violations(&self) -> usize {
        self.value.windows(2).filter(|w| w[1] > w[0]).count()
    }

    /// Fits the series and stores the result on it.
    pub fn fit(&mut self) -> Result<(f64, f64), MetricsError> {
        let (rate, r2) = fit_exponential_decay(self)?;
        self.fitted_rate = Some(rate);
        self.fit_r2 = Some(r2);
        Ok((rate, r2))
    }
}

/// Least-squares line through `(layer, ln value)`. Returns `(−slope, r²)`;
/// r² is reported as 0 when the log-values have no variance.
pub fn fit_exponential_decay(series: &DecaySeries) -> Result<(f64, f64), MetricsError> {
    const MIN_POINTS: usize = 5;
    if series.len() < MIN_POINTS {
        return Err(MetricsError::TooFewPoints {
            needed: MIN_POINTS,
            got: series.len(),
        });
    }
    if let Some((&layer, &value)) = series.layer_index.iter().zip(&series.value).find(|(_, &v)| !(v > 0.0)) {
        return Err(MetricsError::Domain { layer, value });
    }
    let xs: Vec<f64> = series.layer_index.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = series.value.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // Relative threshold: a constant series leaves rounding noise in ln values.
    let r2 = if syy <= 1e-24 * n * (1.0 + my * my) {
        0.0
    } else {
        1.0 - ss_res / syy
    };
    Ok((-slope, r2))
}
