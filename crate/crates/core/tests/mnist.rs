mod common;

use qnnlab_core::dataset::ENCODED_LEN;
use qnnlab_core::{encode_all, filter_split, load_mnist_dir, synthesize_prep, MnistPart, PureState, Split};

#[test]
fn test_set_facts() {
    let Some(dir) = common::mnist_dir() else { return };
    let raw = load_mnist_dir(&dir, MnistPart::Test).unwrap();
    assert_eq!(raw.len(), 10_000);
    assert_eq!(raw[0].label, 7);
    assert_eq!(filter_split(&raw, Split::ZeroOne).len(), 2115);
    let train = load_mnist_dir(&dir, MnistPart::Train).unwrap();
    assert_eq!(train.len(), 60_000);
    assert_eq!(train[..5].iter().map(|s| s.label).collect::<Vec<_>>(), [5, 0, 4, 1, 9]);
}

#[test]
fn encoding_is_order_preserving_and_feeds_the_prep() {
    let Some(dir) = common::mnist_dir() else { return };
    let raw = load_mnist_dir(&dir, MnistPart::Test).unwrap();
    let encoded = encode_all(&raw[..1000]).unwrap();
    assert_eq!(encode_all(&raw[..1000]).unwrap(), encoded);
    for (i, (r, e)) in raw.iter().zip(&encoded).enumerate() {
        assert_eq!(r.label, e.label, "sample {i}");
        assert_eq!(e.amplitudes.len(), ENCODED_LEN);
        assert!(e.amplitudes[196..].iter().all(|&a| a == 0.0));
        let psi = synthesize_prep(&e.amplitudes).unwrap().prepare().unwrap();
        let f = PureState::from_real(&e.amplitudes)
            .unwrap()
            .inner(&psi)
            .unwrap()
            .norm_sqr();
        assert!(f >= 1.0 - 1e-9, "sample {i}: fidelity {f}");
    }
}
