use qnnlab_core::{qnn_forward, QnnModel};

fn fixed_image() -> Vec<f64> {
    let v: Vec<f64> = (0..256)
        .map(|i| {
            if i < 196 {
                ((i * 37 % 101) as f64 / 100.0).powi(2)
            } else {
                0.0
            }
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

#[test]
fn six_hundred_shot_expvals_are_pinned() {
    let model = QnnModel::init(8, 3, vec![0, 1], 5).unwrap();
    let x = fixed_image();
    let exact = qnn_forward(&x, &model, None, None, None).unwrap().expvals;
    let sampled = qnn_forward(&x, &model, None, Some(600), Some(42)).unwrap().expvals;
    // (n0 - n1) / 600 per qubit, stored as n0 - n1 over 2
    let pinned = [0, -27, -1, 7, 6, 12, 43, -3];
    for (q, ((s, e), k)) in sampled.iter().zip(&exact).zip(pinned).enumerate() {
        assert!((s - k as f64 / 300.0).abs() < 1e-12, "qubit {q}: {s}");
        let sigma = ((1.0 - e * e) / 600.0).sqrt();
        assert!((s - e).abs() < 5.0 * sigma, "qubit {q}: {s} vs exact {e}");
    }
}
