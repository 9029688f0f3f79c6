use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qnnlab_core::{load_device_model, QnnModel};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn mnist_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("QNNLAB_MNIST")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"));
    if dir.join("t10k-images-idx3-ubyte").exists() || dir.join("t10k-images-idx3-ubyte.gz").exists() {
        Some(dir)
    } else {
        eprintln!("MNIST not found at {}; set QNNLAB_MNIST", dir.display());
        None
    }
}

fn qnnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnnlab"))
        .args(args)
        .env_remove("QNNLAB_MNIST")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = qnnlab(args);
    assert!(
        out.status.success(),
        "qnnlab {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn noise_free_device(dir: &Path) -> PathBuf {
    let mut quiet = load_device_model(fixture("example-lownoise.json"))
        .unwrap()
        .scaled(0.0)
        .unwrap();
    quiet.name = "quiet".into();
    let path = dir.join("quiet.json");
    fs::write(&path, quiet.to_json_pretty()).unwrap();
    path
}

fn column(csv: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(csv).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].parse().unwrap()).collect()
}

#[test]
fn noise_free_degrade_matches_its_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let device = noise_free_device(tmp.path());
    let out = tmp.path().join("run");
    ok(&[
        "degrade",
        "--device",
        s(&device),
        "--input",
        "basis:5",
        "--depth-max",
        "6",
        "--trials",
        "3",
        "--out",
        s(&out),
    ]);
    let name = "degrade-quiet.csv";
    let refs = column(&out.join(name), "chi2_ref_mean");
    assert_eq!(refs.len(), 6);
    assert!(refs.iter().all(|&c| c < 1e-18), "{refs:?}");
    assert!(out.join("manifest-degrade-quiet.json").exists());
}

#[test]
fn degrade_rejects_bad_requests() {
    let tmp = tempfile::tempdir().unwrap();
    let device = s(&fixture("example-lownoise.json")).to_string();
    let out = s(tmp.path()).to_string();
    for args in [
        vec!["degrade", "--device", &device, "--input", "basis:256", "--out", &out],
        vec!["degrade", "--device", &device, "--input", "image:0", "--out", &out],
        vec![
            "degrade", "--device", &device, "--input", "uniform", "--trials", "0", "--out", &out,
        ],
        vec![
            "degrade",
            "--device",
            "/nonexistent.json",
            "--input",
            "uniform",
            "--out",
            &out,
        ],
    ] {
        assert!(!qnnlab(&args).status.success(), "{args:?}");
    }
}

#[test]
fn noise_free_prep_reproduces_squared_amplitudes() {
    let Some(mnist) = mnist_dir() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let device = noise_free_device(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        ok(&[
            "prep",
            "--device",
            s(&device),
            "--image",
            "7",
            "--mnist",
            s(&mnist),
            "--out",
            s(out),
        ]);
    }
    for f in ["prep.csv", "prep-metrics.csv", "prep-ideal.pgm", "prep-quiet.pgm"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let raw = qnnlab_core::load_mnist_dir(&mnist, qnnlab_core::MnistPart::Test).unwrap();
    let x = qnnlab_core::encode_amplitudes(&qnnlab_core::dataset::pool_sample(&raw[7]).unwrap())
        .unwrap()
        .amplitudes;
    let mut reader = csv::Reader::from_path(a.join("prep.csv")).unwrap();
    let mut seen = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let (index, p): (usize, f64) = (rec[1].parse().unwrap(), rec[2].parse().unwrap());
        assert!((p - x[index] * x[index]).abs() < 1e-8, "{} index {index}", &rec[0]);
        seen += 1;
    }
    assert_eq!(seen, 2 * 256);
    let pgm = fs::read(a.join("prep-ideal.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n14 14\n255\n"));
    assert_eq!(pgm.len(), 13 + 196);
    assert!(
        !qnnlab(&["prep", "--image", "10000", "--mnist", s(&mnist), "--out", s(&a)])
            .status
            .success()
    );
}

#[test]
fn eval_checks_qubit_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("m.json");
    QnnModel::init(8, 1, vec![0, 1], 0).unwrap().save(&model).unwrap();
    let mut small = load_device_model(fixture("example-lownoise.json")).unwrap();
    small.n_qubits = 2;
    small.qubits.truncate(2);
    small.gates.retain(|g| g.qubits.iter().all(|&q| q < 2));
    small.coupling_map.retain(|p| p[0] < 2 && p[1] < 2);
    let device = tmp.path().join("small.json");
    fs::write(&device, small.to_json_pretty()).unwrap();
    let out = qnnlab(&[
        "eval",
        "--model",
        s(&model),
        "--device",
        s(&device),
        "--mnist",
        "/nonexistent",
        "--out",
        s(tmp.path()),
    ]);
    assert!(!out.status.success());
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("qubits"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn train_eval_and_report_round_trip() {
    let Some(mnist) = mnist_dir() else { return };
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    ok(&[
        "train",
        "--mnist",
        s(&mnist),
        "--split",
        "0-1",
        "--layers",
        "1",
        "--max-samples",
        "1500",
        "--seed",
        "3",
        "--out",
        s(&run),
    ]);
    let model = run.join("model-0-1-L1.json");
    let acc = column(&run.join("train-summary-0-1.csv"), "test_accuracy");
    assert!(acc[0] >= 0.9, "{acc:?}");

    // a noise-free device gives the base row exactly when shots are absent
    let quiet = noise_free_device(tmp.path());
    let midnoise = fixture("example-midnoise.json");
    ok(&[
        "eval",
        "--model",
        s(&model),
        "--device",
        s(&quiet),
        "--device",
        s(&midnoise),
        "--noise-scale",
        "0,0.25,0.5,1",
        "--limit",
        "30",
        "--mnist",
        s(&mnist),
        "--out",
        s(&run),
    ]);
    let table = fs::read_to_string(run.join("accuracy.csv")).unwrap();
    let rows: Vec<(&str, f64)> = table
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1], f[2].parse().unwrap())
        })
        .collect();
    let get = |name: &str| rows.iter().find(|r| r.0 == name).unwrap().1;
    for scaled in ["quiet@0", "quiet@0.25", "quiet@0.5", "quiet"] {
        assert_eq!(get(scaled), get("base"));
    }
    let sweep: Vec<f64> = [
        "example-midnoise@0",
        "example-midnoise@0.25",
        "example-midnoise@0.5",
        "example-midnoise",
    ]
    .iter()
    .map(|n| get(n))
    .collect();
    let inversions: Vec<f64> = sweep.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).collect();
    assert!(
        inversions.len() <= 1 && inversions.iter().all(|&d| d <= 0.02),
        "{sweep:?}"
    );

    ok(&["report", s(&run)]);
    let grid = fs::read_to_string(run.join("report-grid.csv")).unwrap();
    // base plus four scales of each device
    assert_eq!(grid.lines().count(), 1 + 9);
    assert!(grid.lines().skip(1).all(|l| l.contains(",ok,")), "{grid}");
    let report_a = fs::read(run.join("report-accuracy.csv")).unwrap();
    ok(&["report", s(&run)]);
    assert_eq!(fs::read(run.join("report-accuracy.csv")).unwrap(), report_a);

    // the manifest records the model's checksum; altering the file breaks it
    let mut bytes = fs::read(&model).unwrap();
    bytes.push(b'\n');
    fs::write(&model, bytes).unwrap();
    let out = qnnlab(&["report", s(&run)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrity error"));
}

#[test]
fn report_needs_valid_manifests() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(!qnnlab(&["report", s(tmp.path())]).status.success());
    fs::write(tmp.path().join("manifest-eval.json"), "{ not json").unwrap();
    let out = qnnlab(&["report", s(tmp.path())]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt manifest"));
}
