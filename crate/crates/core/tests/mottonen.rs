mod common;

use common::unit_nonneg;
use proptest::prelude::*;
use qnnlab_core::{synthesize_prep, GateKind, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fidelity_of_prep(amps: &[f64]) -> f64 {
    let psi = synthesize_prep(amps).unwrap().prepare().unwrap();
    PureState::from_real(amps).unwrap().inner(&psi).unwrap().norm_sqr()
}

#[test]
fn hundred_random_vectors_per_width() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=8 {
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..1 << n)
                .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen() })
                .collect();
            let k = rng.gen_range(0..v.len());
            v[k] += 0.5;
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            let f = fidelity_of_prep(&v);
            assert!(f >= 1.0 - 1e-9, "n={n}: fidelity {f}");
        }
    }
}

proptest! {
    #[test]
    fn fidelity_and_gate_budget(amps in (1..=8usize).prop_flat_map(unit_nonneg)) {
        let n = amps.len().trailing_zeros();
        prop_assert!(fidelity_of_prep(&amps) >= 1.0 - 1e-9);
        let c = synthesize_prep(&amps).unwrap().into_circuit();
        if n >= 2 {
            prop_assert!(c.count(GateKind::Cnot) <= 1 << n);
            prop_assert!(c.count(GateKind::Ry) <= 1 << n);
        }
    }

    #[test]
    fn whole_zero_blocks_stay_finite(n in 2..=8usize, live in 1..4usize, seed in any::<u64>()) {
        // only the first `live` of four equal blocks carry weight
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = (1 << n) / 4;
        let mut v: Vec<f64> = (0..1 << n).map(|i| if i < live * block { rng.gen_range(0.01..1.0) } else { 0.0 }).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let c = synthesize_prep(&v).unwrap().into_circuit();
        prop_assert!(c.ops().iter().all(|op| op.params().iter().all(|p| p.is_finite())));
        prop_assert!(fidelity_of_prep(&v) >= 1.0 - 1e-9);
    }
}
