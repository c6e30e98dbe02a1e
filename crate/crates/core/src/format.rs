//! Checkpoint and metrics documents.
//!
//! Both are indented JSON with every float written as 17 significant digits
//! (`d.dddddddddddddddde±x`), which round-trips any `f64` exactly, and a
//! trailing newline.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::basis::{BasisError, FamilySpec, ParamValue};
use crate::kan::{KanError, KanNetwork};
use crate::metrics::{ConfusionMatrix, RunMetrics};
use crate::train::{EpochRecord, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed document: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("checkpoint holds {got} coefficients, the architecture needs {expected}")]
    CoefficientCount { expected: usize, got: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Network(#[from] KanError),
}

struct FixedDigits<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serialises `value` in the document style, newline-terminated.
pub fn to_document<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn write_document<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), FormatError> {
    let path = path.as_ref();
    let text = to_document(value).map_err(|source| FormatError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_document<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T, FormatError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: name.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Parse { path: name, source })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub family: String,
    pub params: BTreeMap<String, ParamValue>,
    pub dims: Vec<usize>,
    pub degree: usize,
    pub seed: u64,
    /// Layer-major, then input-major, output-major, degree-major.
    pub coeffs: Vec<f64>,
}

impl Checkpoint {
    pub fn from_network(net: &KanNetwork, seed: u64) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            family: net.spec().name().to_string(),
            params: net.spec().params(),
            dims: net.dims().to_vec(),
            degree: net.degree(),
            seed,
            coeffs: net.flat_params(),
        }
    }

    pub fn to_network(&self) -> Result<KanNetwork, FormatError> {
        if self.format_version != FORMAT_VERSION {
            return Err(FormatError::Version(self.format_version));
        }
        let spec = FamilySpec::from_params(&self.family, self.degree, &self.params)?;
        // a zero network fixes the per-layer sizes for this architecture
        let shape = crate::kan::init_network(&spec, &self.dims, self.degree, 0)?;
        let sizes: Vec<usize> = shape.layers().iter().map(|l| l.params().len()).collect();
        let expected: usize = sizes.iter().sum();
        if self.coeffs.len() != expected {
            return Err(FormatError::CoefficientCount {
                expected,
                got: self.coeffs.len(),
            });
        }
        let mut rest = &self.coeffs[..];
        let mut blocks = Vec::with_capacity(sizes.len());
        for n in sizes {
            let (head, tail) = rest.split_at(n);
            blocks.push(head.to_vec());
            rest = tail;
        }
        Ok(KanNetwork::from_params(&spec, &self.dims, self.degree, blocks)?)
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, net: &KanNetwork, seed: u64) -> Result<(), FormatError> {
    write_document(path, &Checkpoint::from_network(net, seed))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<KanNetwork, FormatError> {
    read_document::<Checkpoint>(path)?.to_network()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DataRecord {
    pub name: String,
    pub samples: usize,
    pub normalization: String,
}

/// Metrics document written by `train`, `eval` and summarised by `bench`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub format_version: u32,
    pub family: String,
    pub params: BTreeMap<String, ParamValue>,
    pub dims: Vec<usize>,
    pub degree: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_data: Option<DataRecord>,
    pub eval_data: DataRecord,
    pub metrics: RunMetrics,
    pub confusion: Vec<Vec<u64>>,
    pub parameter_count: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub epoch_log: Vec<EpochRecord>,
    /// Only present when timing was requested, so default files stay
    /// byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_seconds: Option<f64>,
}

impl RunRecord {
    pub fn new(
        net: &KanNetwork,
        seed: u64,
        eval_data: DataRecord,
        metrics: RunMetrics,
        confusion: &ConfusionMatrix,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            family: net.spec().name().to_string(),
            params: net.spec().params(),
            dims: net.dims().to_vec(),
            degree: net.degree(),
            seed,
            config: None,
            train_data: None,
            eval_data,
            metrics,
            confusion: confusion.rows(),
            parameter_count: net.parameter_count(),
            epoch_log: Vec::new(),
            wall_clock_seconds: None,
        }
    }
}
