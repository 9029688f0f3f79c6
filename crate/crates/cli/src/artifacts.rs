//! Output files and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_PREFIX: &str = "manifest-";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command and check its outputs.
/// Output paths are relative to the manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub wallclock_ms: u128,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Write-then-rename within the target directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .context("output path has no file name")?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))
}

pub fn csv_bytes(fill: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    fill(&mut w)?;
    w.into_inner().context("flushing CSV buffer")
}

pub fn serialize_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    csv_bytes(|w| {
        for r in rows {
            w.serialize(r)?;
        }
        Ok(())
    })
}

/// Binary greyscale image scaled so the largest value maps to 255.
pub fn pgm_bytes(values: &[f64], width: usize) -> Result<Vec<u8>> {
    if width == 0 || !values.len().is_multiple_of(width) {
        bail!("{} values do not form rows of {width}", values.len());
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{width} {}\n255\n", values.len() / width).into_bytes();
    out.extend(values.iter().map(|&v| {
        if max > 0.0 {
            (255.0 * v.max(0.0) / max).round() as u8
        } else {
            0
        }
    }));
    Ok(out)
}

/// Collects a command's outputs and writes its manifest last.
pub struct RunRecorder {
    out_dir: PathBuf,
    manifest_name: String,
    command: String,
    config: serde_json::Value,
    seed: u64,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    start: Instant,
}

impl RunRecorder {
    pub fn new(command: &str, tag: Option<&str>, out_dir: &Path, config: &impl Serialize, seed: u64) -> Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        let manifest_name = match tag {
            Some(t) => format!("{MANIFEST_PREFIX}{command}-{t}.json"),
            None => format!("{MANIFEST_PREFIX}{command}.json"),
        };
        Ok(RunRecorder {
            out_dir: out_dir.to_path_buf(),
            manifest_name,
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            start: Instant::now(),
        })
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let manifest = RunManifest {
            artifact_version: format!("qnnlab {}", env!("CARGO_PKG_VERSION")),
            command: self.command,
            argv: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            inputs: self.inputs,
            wallclock_ms: self.start.elapsed().as_millis(),
            outputs: self.outputs,
        };
        let path = self.out_dir.join(&self.manifest_name);
        write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        Ok(path)
    }
}

/// File-name-safe form of a model or device name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.@".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout() {
        let img = pgm_bytes(&[0.0, 0.5, 1.0, 0.25], 2).unwrap();
        assert_eq!(&img[..11], b"P5\n2 2\n255\n");
        assert_eq!(&img[11..], &[0, 128, 255, 64]);
        assert!(pgm_bytes(&[0.0; 3], 2).is_err());
        assert_eq!(&pgm_bytes(&[0.0; 4], 2).unwrap()[11..], &[0; 4]);
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let bytes = csv_bytes(|w| {
            w.write_record(["a", "b,c", "say \"hi\""])?;
            Ok(())
        })
        .unwrap();
        assert_eq!(bytes, b"a,\"b,c\",\"say \"\"hi\"\"\"\r\n");
    }

    #[test]
    fn slug_keeps_safe_characters() {
        assert_eq!(slug("example-midnoise@0.25"), "example-midnoise@0.25");
        assert_eq!(slug("a b/c"), "a_b_c");
    }
}
