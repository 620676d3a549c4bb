//! Domain types shared by every subsystem, the binary embedding interchange
//! format, and the model-free reference embedder.

mod file;
mod toy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::{
    read_embedding_file, sidecar_path, write_embedding_file, write_embedding_file_with_dim,
    FORMAT_VERSION, HEADER_LEN, MAGIC,
};
pub use toy::{area_average, toy_embed, TOY_DIM, TOY_GRID};

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f32 },
    #[error("vector is all zeros")]
    ZeroVector,
    #[error("mixed dimensions: expected {expected}, found {found} for record {id:?}")]
    MixedDimensions {
        expected: usize,
        found: usize,
        id: String,
    },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("invalid record metadata: {0}")]
    InvalidMeta(String),
    #[error("bad magic bytes {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated file: header declares {expected} payload bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("trailing bytes after payload: expected {expected} payload bytes, found {found}")]
    TrailingBytes { expected: u64, found: u64 },
    #[error("header declares dim 0 with {0} records")]
    EmptyDimWithRecords(u64),
    #[error("sidecar has {found} records but header declares {expected}")]
    SidecarCountMismatch { expected: u64, found: u64 },
    #[error("sidecar line {line}: {source}")]
    SidecarParse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("image has zero area")]
    EmptyImage,
    #[error("image is entirely black")]
    BlackImage,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fixed-dimension real vector. Components are finite 32-bit floats and the
/// dimension is at least 1; the all-zero check is deferred to ingest because
/// the file format can legitimately carry such vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingVector {
    components: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(components: Vec<f32>) -> Result<Self, InterchangeError> {
        if components.is_empty() {
            return Err(InterchangeError::ZeroDimension);
        }
        if let Some((index, &value)) = components.iter().enumerate().find(|(_, c)| !c.is_finite())
        {
            return Err(InterchangeError::NonFinite { index, value });
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.components
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|&c| c == 0.0)
    }

    /// Rejects the all-zero vector, for which cosine distance is undefined.
    pub fn ensure_nonzero(&self) -> Result<(), InterchangeError> {
        if self.is_zero() {
            Err(InterchangeError::ZeroVector)
        } else {
            Ok(())
        }
    }

    /// Euclidean norm with 64-bit accumulation.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|&c| f64::from(c) * f64::from(c))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f32) -> Result<Self, InterchangeError> {
        Self::new(self.components.iter().map(|c| c * factor).collect())
    }
}

impl TryFrom<Vec<f32>> for EmbeddingVector {
    type Error = InterchangeError;

    fn try_from(value: Vec<f32>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Ai,
    Human,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ai => "ai",
            Label::Human => "human",
        }
    }

    /// Report vocabulary: AI images are "fake", human images are "real".
    pub fn report_str(self) -> &'static str {
        match self {
            Label::Ai => "fake",
            Label::Human => "real",
        }
    }

    pub fn from_report_str(s: &str) -> Option<Self> {
        match s {
            "fake" => Some(Label::Ai),
            "real" => Some(Label::Human),
            _ => None,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Label::Ai => Label::Human,
            Label::Human => Label::Ai,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = InterchangeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ai" | "fake" => Ok(Label::Ai),
            "human" | "real" => Ok(Label::Human),
            other => Err(InterchangeError::InvalidMeta(format!(
                "unknown label {other:?}"
            ))),
        }
    }
}

/// Per-vector metadata carried in the sidecar file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub id: String,
    pub source_name: String,
    pub label: Label,
    pub namespace: String,
}

impl RecordMeta {
    pub fn new(
        id: impl Into<String>,
        source_name: impl Into<String>,
        label: Label,
        namespace: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            source_name: source_name.into(),
            label,
            namespace: namespace.into(),
        }
    }

    pub fn validate(&self) -> Result<(), InterchangeError> {
        if self.id.is_empty() {
            return Err(InterchangeError::InvalidMeta("empty id".into()));
        }
        if self.namespace.is_empty() {
            return Err(InterchangeError::InvalidMeta(format!(
                "empty namespace for id {:?}",
                self.id
            )));
        }
        Ok(())
    }
}

/// One labeled vector as it travels between files, the store and the ledger.
pub type Record = (RecordMeta, EmbeddingVector);
