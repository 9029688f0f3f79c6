//! MNIST ingestion and amplitude encoding.
//!
//! Images are scaled to `[0, 1]`, max-pooled from 28×28 to 14×14, flattened
//! row-major into the first 196 of 256 amplitudes and L2-normalized.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::DatasetError;

pub const RAW_SIDE: usize = 28;
pub const POOLED_SIDE: usize = 14;
pub const POOLED_PIXELS: usize = POOLED_SIDE * POOLED_SIDE;
pub const ENCODED_QUBITS: usize = 8;
pub const ENCODED_LEN: usize = 1 << ENCODED_QUBITS;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// A 28×28 image with pixels in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub pixels: Vec<f64>,
    pub label: u8,
}

/// A pooled 14×14 image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    pub pixels: Vec<f64>,
    pub label: u8,
}

/// Non-negative unit vector of 256 amplitudes; entries from 196 on are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSample {
    pub amplitudes: Vec<f64>,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "0-1")]
    ZeroOne,
    #[serde(rename = "0-3")]
    ZeroThree,
    #[serde(rename = "0-9")]
    ZeroNine,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::ZeroOne, Split::ZeroThree, Split::ZeroNine];

    pub fn n_classes(self) -> usize {
        match self {
            Split::ZeroOne => 2,
            Split::ZeroThree => 4,
            Split::ZeroNine => 10,
        }
    }

    pub fn class_labels(self) -> Vec<u8> {
        (0..self.n_classes() as u8).collect()
    }

    pub fn contains(self, label: u8) -> bool {
        (label as usize) < self.n_classes()
    }

    pub fn default_epochs(self) -> usize {
        match self {
            Split::ZeroOne => 1,
            Split::ZeroThree => 2,
            Split::ZeroNine => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::ZeroOne => "0-1",
            Split::ZeroThree => "0-3",
            Split::ZeroNine => "0-9",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|split| split.as_str() == s)
            .ok_or_else(|| DatasetError::UnknownSplit(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnistPart {
    Train,
    Test,
}

impl MnistPart {
    fn prefix(self) -> &'static str {
        match self {
            MnistPart::Train => "train",
            MnistPart::Test => "t10k",
        }
    }
}

fn maybe_gunzip(bytes: &[u8]) -> Result<std::borrow::Cow<'_, [u8]>, DatasetError> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| DatasetError::Truncated(format!("gzip stream: {e}")))?;
        Ok(out.into())
    } else {
        Ok(bytes.into())
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32, DatasetError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| DatasetError::Truncated(format!("{what} header")))
}

/// Parses an IDX image/label file pair, each optionally gzip-compressed.
pub fn parse_idx(image_bytes: &[u8], label_bytes: &[u8]) -> Result<Vec<RawSample>, DatasetError> {
    let images = maybe_gunzip(image_bytes)?;
    let labels = maybe_gunzip(label_bytes)?;

    let magic = be_u32(&images, 0, "image")?;
    if magic != IMAGES_MAGIC {
        return Err(DatasetError::Magic {
            expected: IMAGES_MAGIC,
            found: magic,
        });
    }
    let magic = be_u32(&labels, 0, "label")?;
    if magic != LABELS_MAGIC {
        return Err(DatasetError::Magic {
            expected: LABELS_MAGIC,
            found: magic,
        });
    }

    let n_images = be_u32(&images, 4, "image")? as usize;
    let rows = be_u32(&images, 8, "image")? as usize;
    let cols = be_u32(&images, 12, "image")? as usize;
    let n_labels = be_u32(&labels, 4, "label")? as usize;
    if (rows, cols) != (RAW_SIDE, RAW_SIDE) {
        return Err(DatasetError::Shape(format!(
            "IDX images are {rows}x{cols}, expected 28x28"
        )));
    }
    if n_images != n_labels {
        return Err(DatasetError::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }
    let pixels_per = rows * cols;
    let image_payload = &images[16..];
    let label_payload = &labels[8..];
    if image_payload.len() < n_images * pixels_per {
        return Err(DatasetError::Truncated(format!(
            "image payload has {} bytes, header promises {}",
            image_payload.len(),
            n_images * pixels_per
        )));
    }
    if label_payload.len() < n_labels {
        return Err(DatasetError::Truncated(format!(
            "label payload has {} bytes, header promises {n_labels}",
            label_payload.len()
        )));
    }

    Ok(image_payload
        .chunks_exact(pixels_per)
        .zip(label_payload)
        .take(n_images)
        .map(|(img, &label)| RawSample {
            pixels: img.iter().map(|&b| b as f64 / 255.0).collect(),
            label,
        })
        .collect())
}

fn find_idx_file(dir: &Path, stem: &str) -> Result<PathBuf, DatasetError> {
    let plain = dir.join(stem);
    if plain.is_file() {
        return Ok(plain);
    }
    let gz = dir.join(format!("{stem}.gz"));
    if gz.is_file() {
        return Ok(gz);
    }
    Err(DatasetError::Io {
        path: plain,
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "MNIST file not found (also tried .gz)"),
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, DatasetError> {
    std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Image and label file of one half of MNIST, plain or `.gz`.
pub fn mnist_files(dir: impl AsRef<Path>, part: MnistPart) -> Result<(PathBuf, PathBuf), DatasetError> {
    let dir = dir.as_ref();
    let images = find_idx_file(dir, &format!("{}-images-idx3-ubyte", part.prefix()))?;
    let labels = find_idx_file(dir, &format!("{}-labels-idx1-ubyte", part.prefix()))?;
    Ok((images, labels))
}

/// Loads one half of MNIST from a directory holding the canonical file names.
pub fn load_mnist_dir(dir: impl AsRef<Path>, part: MnistPart) -> Result<Vec<RawSample>, DatasetError> {
    let (images, labels) = mnist_files(dir, part)?;
    parse_idx(&read_file(&images)?, &read_file(&labels)?)
}

pub fn max_pool_2x2(pixels: &[f64]) -> Result<Vec<f64>, DatasetError> {
    if pixels.len() != RAW_SIDE * RAW_SIDE {
        return Err(DatasetError::Shape(format!(
            "expected 784 pixels, got {}",
            pixels.len()
        )));
    }
    let mut out = Vec::with_capacity(POOLED_PIXELS);
    for r in 0..POOLED_SIDE {
        let top = &pixels[2 * r * RAW_SIDE..(2 * r + 1) * RAW_SIDE];
        let bottom = &pixels[(2 * r + 1) * RAW_SIDE..(2 * r + 2) * RAW_SIDE];
        for c in 0..POOLED_SIDE {
            out.push(top[2 * c].max(top[2 * c + 1]).max(bottom[2 * c]).max(bottom[2 * c + 1]));
        }
    }
    Ok(out)
}

pub fn pool_sample(raw: &RawSample) -> Result<ImageSample, DatasetError> {
    Ok(ImageSample {
        pixels: max_pool_2x2(&raw.pixels)?,
        label: raw.label,
    })
}

pub fn encode_amplitudes(image: &ImageSample) -> Result<EncodedSample, DatasetError> {
    if image.pixels.len() != POOLED_PIXELS {
        return Err(DatasetError::Shape(format!(
            "expected 196 pixels, got {}",
            image.pixels.len()
        )));
    }
    let norm = image.pixels.iter().map(|p| p * p).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(DatasetError::ZeroImage);
    }
    let mut amplitudes = vec![0.0; ENCODED_LEN];
    for (a, p) in amplitudes.iter_mut().zip(&image.pixels) {
        *a = p / norm;
    }
    Ok(EncodedSample {
        amplitudes,
        label: image.label,
    })
}

/// Pools and encodes, preserving order.
pub fn encode_all(raw: &[RawSample]) -> Result<Vec<EncodedSample>, DatasetError> {
    raw.iter().map(|s| encode_amplitudes(&pool_sample(s)?)).collect()
}

/// Keeps samples whose digit belongs to the split. Labels are already
/// contiguous from 0 and stay unchanged.
pub fn filter_split<T: Clone + HasLabel>(samples: &[T], split: Split) -> Vec<T> {
    samples.iter().filter(|s| split.contains(s.label())).cloned().collect()
}

pub trait HasLabel {
    fn label(&self) -> u8;
}

impl HasLabel for RawSample {
    fn label(&self) -> u8 {
        self.label
    }
}

impl HasLabel for ImageSample {
    fn label(&self) -> u8 {
        self.label
    }
}

impl HasLabel for EncodedSample {
    fn label(&self) -> u8 {
        self.label
    }
}
