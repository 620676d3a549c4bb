//! Tamper-evident registry of embedding digests.
//!
//! Two ledgers (`ai` and `human`) stand in for the on-chain hash storage
//! contracts: `store_hash` appends a digest if absent, `hash_exists` answers
//! membership. Every entry is chained to its predecessor so any edit of the
//! file is caught by [`verify_chain`].

mod chain;
mod gas;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::interchange::{EmbeddingVector, Label};

pub use chain::{
    verify_chain, ChainDefect, ChainStatus, Ledger, LedgerEntry, StoreReceipt, ENTRY_LEN,
    LEDGER_MAGIC, LEDGER_VERSION,
};
pub use gas::{simulate_gas, GasMode, GasModel, GasRun, GasSummary};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("zero vector cannot be hashed")]
    ZeroVector,
    #[error("ledger {path} is corrupt: {status}")]
    Corrupt { path: String, status: ChainStatus },
    #[error("bad ledger header: {0}")]
    BadHeader(String),
    #[error("ledger already exists at {0}")]
    AlreadyExists(String),
    #[error("invalid gas model: {0}")]
    InvalidGasModel(String),
    #[error("transaction count must be at least 1")]
    ZeroTransactions,
    #[error("invalid digest: {0}")]
    InvalidDigest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 256-bit digest of a canonically serialized embedding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EmbedHash(pub [u8; 32]);

impl EmbedHash {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for EmbedHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EmbedHash({})", &self.to_hex()[..16])
    }
}

impl fmt::Display for EmbedHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for EmbedHash {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| LedgerError::InvalidDigest(e.to_string()))?;
        Ok(Self(out))
    }
}

impl Serialize for EmbedHash {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for EmbedHash {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical byte form of a vector: `dim` as u32 LE, then each component as
/// f32 LE. Negative zero is written as positive zero so that numerically
/// equal vectors serialize identically.
pub fn canonical_bytes(v: &EmbeddingVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + v.dim() * 4);
    out.extend_from_slice(&(v.dim() as u32).to_le_bytes());
    for &c in v.as_slice() {
        let c = if c == 0.0 { 0.0f32 } else { c };
        out.extend_from_slice(&c.to_le_bytes());
    }
    out
}

/// SHA-256 of [`canonical_bytes`].
pub fn embed_hash(v: &EmbeddingVector) -> Result<EmbedHash, LedgerError> {
    if v.is_zero() {
        return Err(LedgerError::ZeroVector);
    }
    Ok(EmbedHash(Sha256::digest(canonical_bytes(v)).into()))
}

/// Result of exact-hash lookup across both ledgers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashVerdict {
    Ai,
    Human,
    Undetermined,
}

impl From<Label> for HashVerdict {
    fn from(l: Label) -> Self {
        match l {
            Label::Ai => HashVerdict::Ai,
            Label::Human => HashVerdict::Human,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashClassification {
    pub verdict: HashVerdict,
    /// The digest is registered in both ledgers; the verdict fell back to AI.
    pub conflict: bool,
}

pub fn classify_by_hash(h: &EmbedHash, ai: &Ledger, human: &Ledger) -> HashClassification {
    match (ai.hash_exists(h), human.hash_exists(h)) {
        (true, true) => {
            log::warn!("digest {h} is registered in both the ai and human ledgers; reporting ai");
            HashClassification {
                verdict: HashVerdict::Ai,
                conflict: true,
            }
        }
        (true, false) => HashClassification {
            verdict: HashVerdict::Ai,
            conflict: false,
        },
        (false, true) => HashClassification {
            verdict: HashVerdict::Human,
            conflict: false,
        },
        (false, false) => HashClassification {
            verdict: HashVerdict::Undetermined,
            conflict: false,
        },
    }
}
