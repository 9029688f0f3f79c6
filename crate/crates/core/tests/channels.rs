mod common;

use common::{max_abs_diff, min_eigenvalue, random_density};
use proptest::prelude::*;
use qnnlab_core::{amplitude_damping, depolarizing, phase_damping, thermal_relaxation, KrausChannel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn any_channel() -> impl Strategy<Value = KrausChannel> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(|p| depolarizing(p, 1).unwrap()),
        (0.0..=1.0f64).prop_map(|p| depolarizing(p, 2).unwrap()),
        (0.0..=1.0f64).prop_map(|g| amplitude_damping(g).unwrap()),
        (0.0..=1.0f64).prop_map(|l| phase_damping(l).unwrap()),
        (1.0..500.0f64, 0.01..=1.0f64, 0.0..5000.0f64).prop_map(|(t1, frac, dur)| thermal_relaxation(
            t1,
            2.0 * t1 * frac,
            dur
        )
        .unwrap()),
    ]
}

fn targets(arity: usize, n_qubits: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n_qubits).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(move |v| v[..arity].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn every_channel_is_complete(ch in any_channel()) {
        prop_assert!(ch.completeness_error() < 1e-12);
    }

    #[test]
    fn application_is_cptp_on_random_states(
        (ch, t) in any_channel().prop_flat_map(|ch| { let a = ch.arity(); (Just(ch), targets(a, 3)) }),
        seed in any::<u64>(),
    ) {
        let rho = random_density(3, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut out = rho.clone();
        out.apply_channel(&ch, &t).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12 && out.trace().im.abs() < 1e-12);
        prop_assert!(out.is_hermitian(1e-12));
        prop_assert!(min_eigenvalue(&out) > -1e-9);

        let mut reference = rho;
        reference.apply_kraus_sum(&ch, &t);
        prop_assert!(max_abs_diff(out.entries(), reference.entries()) < 1e-12);
    }
}

#[test]
fn general_structure_takes_the_kraus_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ch = thermal_relaxation(40.0, 30.0, 500.0).unwrap();
    let rho = random_density(2, &mut rng);
    let mut fast = rho.clone();
    fast.apply_channel(&ch, &[1]).unwrap();
    let mut general = rho;
    general.apply_channel(&ch.as_general(), &[1]).unwrap();
    assert!(max_abs_diff(fast.entries(), general.entries()) < 1e-13);
}
