#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qnnlab_core::{DensityMatrix, C64};
use rand::Rng;

/// `A A^dagger / tr` for a random complex `A`; full rank almost surely.
pub fn random_density<R: Rng>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << n_qubits;
    let a: Vec<C64> = (0..d * d)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut rho = vec![C64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            rho[r * d + c] = (0..d).map(|k| a[r * d + k] * a[c * d + k].conj()).sum();
        }
    }
    let tr: f64 = (0..d).map(|i| rho[i * d + i].re).sum();
    for x in &mut rho {
        *x /= tr;
    }
    for i in 0..d {
        rho[i * d + i].im = 0.0;
    }
    DensityMatrix::from_entries(n_qubits, rho).unwrap()
}

pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let m = DMatrix::from_fn(d, d, |r, c| rho.get(r, c));
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Non-negative unit vector of length `2^n` with some exact zeros.
pub fn unit_nonneg(n_qubits: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.0..1.0f64], 1 << n_qubits)
        .prop_filter("non-zero", |v| v.iter().any(|&x| x > 1e-3))
        .prop_map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
}

/// MNIST location: `QNNLAB_MNIST`, else `data/mnist` at the workspace root.
pub fn mnist_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("QNNLAB_MNIST")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    let present = ["t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz"]
        .iter()
        .any(|f| dir.join(f).exists());
    if present {
        Some(dir)
    } else {
        eprintln!("MNIST not found at {}; set QNNLAB_MNIST", dir.display());
        None
    }
}
