//! MNIST IDX ingestion, normalization and deterministic subsetting.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;
pub const MNIST_CLASSES: usize = 10;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("bad magic number 0x{found:08x} (expected 0x{expected:08x})")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated file: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("image dimensions {rows}x{cols} are not 28x28")]
    DimensionMismatch { rows: usize, cols: usize },
    #[error("label {value} at index {index} is not a digit class")]
    InvalidLabel { index: usize, value: u8 },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("invalid subset size {n} for a dataset of {total}")]
    InvalidSubset { n: usize, total: usize },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

/// Row-major features with one class index per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    num_classes: usize,
    name: String,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Vec<f64>,
        labels: Vec<usize>,
        dim: usize,
        num_classes: usize,
    ) -> Result<Self, DataError> {
        if dim == 0 || num_classes == 0 {
            return Err(DataError::Invalid("zero feature width or class count".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(DataError::CountMismatch {
                images: features.len() / dim,
                labels: labels.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Invalid("non-finite feature".into()));
        }
        if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(DataError::InvalidLabel {
                index,
                value: value.min(255) as u8,
            });
        }
        Ok(Self {
            features,
            labels,
            dim,
            num_classes,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows at `indices`, in that order.
    pub fn gather(&self, indices: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let mut x = Vec::with_capacity(indices.len() * self.dim);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.labels[i]);
        }
        (x, y)
    }

    pub fn label_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// Fraction of the most frequent class.
    pub fn majority_rate(&self) -> f64 {
        let h = self.label_histogram();
        *h.iter().max().unwrap_or(&0) as f64 / self.len().max(1) as f64
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, DataError> {
    let io = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let raw = fs::read(path).map_err(io)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(io)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated {
            needed: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), DataError> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(DataError::BadMagic { expected, found });
    }
    Ok(())
}

fn payload(bytes: &[u8], header: usize, len: usize) -> Result<&[u8], DataError> {
    let needed = header + len;
    if bytes.len() < needed {
        return Err(DataError::Truncated {
            needed,
            found: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(DataError::Invalid(format!(
            "{} trailing bytes after the payload",
            bytes.len() - needed
        )));
    }
    Ok(&bytes[header..needed])
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<RawImages, DataError> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(DataError::DimensionMismatch { rows, cols });
    }
    let pixels = payload(bytes, 16, count * IMAGE_PIXELS)?.to_vec();
    Ok(RawImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let labels = payload(bytes, 8, count)?;
    if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &v)| v as usize >= MNIST_CLASSES) {
        return Err(DataError::InvalidLabel { index, value });
    }
    Ok(labels.to_vec())
}

/// Reads an IDX image file, gunzipping when it starts with `1f 8b`.
pub fn load_idx_images(path: impl AsRef<Path>) -> Result<RawImages, DataError> {
    parse_idx_images(&read_bytes(path.as_ref())?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>, DataError> {
    parse_idx_labels(&read_bytes(path.as_ref())?)
}

/// Flattens to 784 features scaled by 1/255.
pub fn to_dataset(name: impl Into<String>, images: &RawImages, labels: &[u8]) -> Result<Dataset, DataError> {
    if images.count != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    let features = images.pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let labels = labels.iter().map(|&l| l as usize).collect();
    Dataset::new(name, features, labels, IMAGE_PIXELS, MNIST_CLASSES)
}

pub fn load_mnist(
    name: impl Into<String>,
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
) -> Result<Dataset, DataError> {
    to_dataset(name, &load_idx_images(images)?, &load_idx_labels(labels)?)
}

/// `n` rows drawn without replacement by ChaCha8 seeded from `seed`.
pub fn subset(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset, DataError> {
    if n == 0 || n > ds.len() {
        return Err(DataError::InvalidSubset { n, total: ds.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, ds.len(), n).into_vec();
    let (features, labels) = ds.gather(&indices);
    Dataset::new(format!("{}[{n}@{seed}]", ds.name), features, labels, ds.dim, ds.num_classes)
}
