//! Glue between the store, the ledgers and the classifier: the three
//! detection modes, ingestion, the benchmark driver and the HTTP service.

mod bench;
mod config;
mod engine;
pub mod service;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::ClassifyError;
use crate::interchange::InterchangeError;
use crate::ledger::LedgerError;
use crate::perturb::PerturbError;
use crate::vecstore::StoreError;

pub use bench::{cmd_bench, embed_images, load_corpus, BenchInput, BenchReport};
pub use config::{EngineConfig, CONFIG_FILE};
pub use engine::{
    cmd_gas, verify_ledger_files, CollectionHealth, Engine, Health, IngestSummary, LedgerHealth, AI_LEDGER_FILE,
    HUMAN_LEDGER_FILE, LEDGER_DIR, STORE_DIR,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("store at {0} is not initialized (run `provenance init`)")]
    Uninitialized(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("missing embedding for variant {0:?}")]
    MissingEmbedding(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Interchange(#[from] InterchangeError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error("image: {0}")]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EngineError {
    /// Process exit code: 2 for data/validation failures, 3 for ledger
    /// integrity failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            EngineError::Ledger(LedgerError::Corrupt { .. } | LedgerError::BadHeader(_)) => 3,
            _ => 2,
        }
    }
}

/// Which evidence a classification draws on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameworkMode {
    /// Exact digest lookup in the two ledgers only.
    HashOnly,
    /// Nearest-distance rule over the two collections only.
    VectorOnly,
    /// Vector verdict plus a ledger verifiability flag.
    #[default]
    Hybrid,
}

impl FrameworkMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameworkMode::HashOnly => "hash_only",
            FrameworkMode::VectorOnly => "vector_only",
            FrameworkMode::Hybrid => "hybrid",
        }
    }

    pub fn uses_ledger(self) -> bool {
        self != FrameworkMode::VectorOnly
    }

    pub fn uses_vectors(self) -> bool {
        self != FrameworkMode::HashOnly
    }
}

impl fmt::Display for FrameworkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameworkMode {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hash_only" | "hash" => Ok(FrameworkMode::HashOnly),
            "vector_only" | "vector" => Ok(FrameworkMode::VectorOnly),
            "hybrid" => Ok(FrameworkMode::Hybrid),
            other => Err(EngineError::InvalidInput(format!(
                "unknown mode {other:?} (expected hash_only, vector_only or hybrid)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    Ai,
    Human,
    Undetermined,
}

/// Answer for one query. Similarities appear iff the mode uses vectors;
/// `verified` appears iff the mode uses the ledgers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub prediction: Prediction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ai_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearest_ai_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearest_human_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    pub mode: FrameworkMode,
    /// Set when the ledgers disagree with the verdict (digest registered
    /// under the other label, or under both).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub conflict: bool,
}

impl ClassifyResponse {
    /// Checks the mode/field presence contract.
    pub fn schema_valid(&self) -> bool {
        let sims = [
            self.human_similarity.is_some(),
            self.ai_similarity.is_some(),
            self.nearest_ai_id.is_some(),
            self.nearest_human_id.is_some(),
        ];
        let vector_fields_ok = sims.iter().all(|&s| s == self.mode.uses_vectors());
        let verified_ok = self.verified.is_some() == self.mode.uses_ledger();
        let prediction_ok = self.mode == FrameworkMode::HashOnly
            || self.prediction != Prediction::Undetermined;
        vector_fields_ok && verified_ok && prediction_ok
    }
}
