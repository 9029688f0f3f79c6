use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use walkdir::WalkDir;

use crate::args::ReportArgs;
use crate::artifacts::{csv_bytes, sha256_hex, write_atomic, RunManifest, MANIFEST_PREFIX};

/// An output file whose bytes no longer match its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrityError {
    pub manifest: PathBuf,
    pub file: PathBuf,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for IntegrityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integrity error: {} (listed in {}) has sha256 {}, manifest records {}",
            self.file.display(),
            self.manifest.display(),
            self.actual,
            self.expected
        )
    }
}

impl std::error::Error for IntegrityError {}

pub struct VerifiedRun {
    /// Relative to the run directory.
    pub manifest_path: PathBuf,
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

/// Parses every manifest under `dir` and checks each listed output's
/// checksum. Manifests come back sorted by path.
pub fn verify_run_dir(dir: &Path) -> Result<Vec<VerifiedRun>> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut runs = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy();
        if !entry.file_type().is_file() || !name.starts_with(MANIFEST_PREFIX) || !name.ends_with(".json") {
            continue;
        }
        let path = entry.path();
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let manifest: RunManifest =
            serde_json::from_slice(&bytes).with_context(|| format!("corrupt manifest {}", path.display()))?;
        let run_dir = path.parent().unwrap_or(dir).to_path_buf();
        for out in &manifest.outputs {
            let file = run_dir.join(&out.path);
            let data = fs::read(&file)
                .with_context(|| format!("{} lists {}, which cannot be read", path.display(), file.display()))?;
            let actual = sha256_hex(&data);
            if actual != out.sha256 {
                return Err(IntegrityError {
                    manifest: path.to_path_buf(),
                    file,
                    expected: out.sha256.clone(),
                    actual,
                }
                .into());
            }
        }
        let manifest_path = path.strip_prefix(dir).unwrap_or(path).to_path_buf();
        runs.push(VerifiedRun {
            manifest_path,
            dir: run_dir,
            manifest,
        });
    }
    if runs.is_empty() {
        bail!("no run manifests under {}", dir.display());
    }
    Ok(runs)
}

/// Rows of every output named `prefix*.csv`, tagged with the manifest that
/// lists it. All such files must share one header.
fn merge_outputs(runs: &[VerifiedRun], prefix: &str) -> Result<Option<(csv::StringRecord, Vec<csv::StringRecord>)>> {
    let mut header: Option<csv::StringRecord> = None;
    let mut rows = Vec::new();
    for run in runs {
        for out in run
            .manifest
            .outputs
            .iter()
            .filter(|o| o.path.starts_with(prefix) && o.path.ends_with(".csv"))
        {
            let path = run.dir.join(&out.path);
            let mut reader = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut h = csv::StringRecord::from(vec!["run"]);
            h.extend(reader.headers()?.iter());
            match &header {
                Some(existing) if *existing != h => bail!("{} has header {h:?}, expected {existing:?}", path.display()),
                _ => header = Some(h),
            }
            for record in reader.records() {
                let mut row = csv::StringRecord::from(vec![run.manifest_path.display().to_string()]);
                row.extend(record?.iter());
                rows.push(row);
            }
        }
    }
    Ok(header.map(|h| (h, rows)))
}

fn records_csv(header: &csv::StringRecord, rows: &[csv::StringRecord]) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        Ok(())
    })
}

/// One row per `(split, noise model, layers)` cell of each split's grid:
/// `ok`, `missing`, or `duplicate` when several runs filled it.
fn grid_rows(header: &csv::StringRecord, rows: &[csv::StringRecord]) -> Result<Vec<[String; 5]>> {
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("accuracy table lacks {name}"))
    };
    let (split, noise, layers, acc) = (col("split")?, col("noise_model")?, col("layers")?, col("accuracy")?);
    let mut cells: BTreeMap<(String, String, usize), Vec<String>> = BTreeMap::new();
    let mut grid: BTreeMap<String, (BTreeSet<String>, BTreeSet<usize>)> = BTreeMap::new();
    for r in rows {
        let l: usize = r[layers]
            .parse()
            .with_context(|| format!("bad layer count {:?}", &r[layers]))?;
        let g = grid.entry(r[split].to_string()).or_default();
        g.0.insert(r[noise].to_string());
        g.1.insert(l);
        cells
            .entry((r[split].to_string(), r[noise].to_string(), l))
            .or_default()
            .push(r[acc].to_string());
    }
    let mut out = Vec::new();
    for (s, (noises, layer_set)) in &grid {
        for n in noises {
            for &l in layer_set {
                let (status, value) = match cells.get(&(s.clone(), n.clone(), l)).map(Vec::as_slice) {
                    None => ("missing", String::new()),
                    Some([one]) => ("ok", one.clone()),
                    Some(many) => ("duplicate", many.join(";")),
                };
                out.push([s.clone(), n.clone(), l.to_string(), status.to_string(), value]);
            }
        }
    }
    Ok(out)
}

pub fn run(args: &ReportArgs) -> Result<()> {
    let runs = verify_run_dir(&args.run_dir)?;
    let out_dir = args.out.clone().unwrap_or_else(|| args.run_dir.clone());
    fs::create_dir_all(&out_dir)?;
    let manifests = csv_bytes(|w| {
        w.write_record(["manifest", "command", "seed", "outputs", "status"])?;
        for r in &runs {
            w.write_record([
                r.manifest_path.display().to_string(),
                r.manifest.command.clone(),
                r.manifest.seed.to_string(),
                r.manifest.outputs.len().to_string(),
                "verified".to_string(),
            ])?;
        }
        Ok(())
    })?;
    write_atomic(&out_dir.join("report-manifests.csv"), &manifests)?;
    eprintln!("{} manifest(s) verified", runs.len());

    if let Some((header, rows)) = merge_outputs(&runs, "train-summary")? {
        write_atomic(&out_dir.join("report-train.csv"), &records_csv(&header, &rows)?)?;
    }
    if let Some((header, rows)) = merge_outputs(&runs, "accuracy-long")? {
        write_atomic(&out_dir.join("report-accuracy.csv"), &records_csv(&header, &rows)?)?;
        let grid = grid_rows(&header, &rows)?;
        for cell in grid.iter().filter(|c| c[3] != "ok") {
            eprintln!(
                "incomplete grid: split {} noise model {} layers {} is {}",
                cell[0], cell[1], cell[2], cell[3]
            );
        }
        let bytes = csv_bytes(|w| {
            w.write_record(["split", "noise_model", "layers", "status", "accuracy"])?;
            for c in &grid {
                w.write_record(c)?;
            }
            Ok(())
        })?;
        write_atomic(&out_dir.join("report-grid.csv"), &bytes)?;
    }
    Ok(())
}
