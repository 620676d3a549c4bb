//! Exact nearest-neighbor store over labeled collections.
//!
//! A [`Collection`] holds one label's vectors split into namespaces
//! (`train`, `test`, ...). Queries are a full linear scan with cosine
//! distance; results are ordered by `(distance, id)` so they are identical to
//! any exhaustive scan using the same tie-break.

mod distance;
mod store;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interchange::{EmbeddingVector, InterchangeError, Label, Record, RecordMeta};

pub use distance::cosine_distance;
pub(crate) use distance::{distance_with_norms, norm64};
pub use store::{CollectionInfo, UpsertSummary, VectorStore, MANIFEST_FILE};

/// Namespaces at least this large are scanned in parallel.
const PARALLEL_SCAN_MIN: usize = 4096;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("collection {0:?} already exists")]
    DuplicateCollection(String),
    #[error("collection {0:?} not found")]
    UnknownCollection(String),
    #[error("namespace {namespace:?} of collection {collection:?} is empty")]
    EmptyNamespace {
        collection: String,
        namespace: String,
    },
    #[error("record {id:?} is labeled {found} but collection {collection:?} holds {expected}")]
    LabelMismatch {
        collection: String,
        id: String,
        expected: Label,
        found: Label,
    },
    #[error("invalid name {0:?}: use ASCII letters, digits, '-', '_' or '.'")]
    InvalidName(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("corrupt manifest {path}: {reason}")]
    CorruptManifest { path: String, reason: String },
    #[error(transparent)]
    Interchange(#[from] InterchangeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub distance: f64,
    pub source_name: String,
}

#[derive(Clone, Debug, Default)]
struct Namespace {
    ids: Vec<String>,
    source_names: Vec<String>,
    data: Vec<f32>,
    norms: Vec<f64>,
    rows: HashMap<String, usize>,
}

impl Namespace {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn row(&self, i: usize, dim: usize) -> &[f32] {
        &self.data[i * dim..(i + 1) * dim]
    }

    /// Returns true when an existing record was replaced.
    fn upsert(&mut self, dim: usize, meta: &RecordMeta, v: &EmbeddingVector) -> bool {
        let norm = norm64(v.as_slice());
        match self.rows.get(&meta.id) {
            Some(&row) => {
                self.data[row * dim..(row + 1) * dim].copy_from_slice(v.as_slice());
                self.norms[row] = norm;
                self.source_names[row] = meta.source_name.clone();
                true
            }
            None => {
                self.rows.insert(meta.id.clone(), self.ids.len());
                self.ids.push(meta.id.clone());
                self.source_names.push(meta.source_name.clone());
                self.data.extend_from_slice(v.as_slice());
                self.norms.push(norm);
                false
            }
        }
    }
}

fn validate_name(name: &str) -> Result<(), StoreError> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidName(name.to_string()))
    }
}

/// A labeled set of vectors of one dimension, partitioned by namespace.
#[derive(Clone, Debug)]
pub struct Collection {
    name: String,
    label: Label,
    dim: usize,
    generation: u64,
    namespaces: BTreeMap<String, Namespace>,
}

impl Collection {
    pub fn new(name: impl Into<String>, label: Label, dim: usize) -> Result<Self, StoreError> {
        let name = name.into();
        validate_name(&name)?;
        if dim == 0 {
            return Err(StoreError::ZeroDimension);
        }
        Ok(Self {
            name,
            label,
            dim,
            generation: 0,
            namespaces: BTreeMap::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn namespaces(&self) -> impl Iterator<Item = &str> {
        self.namespaces.keys().map(String::as_str)
    }

    /// Number of records in `namespace` (0 if it does not exist).
    pub fn len(&self, namespace: &str) -> usize {
        self.namespaces.get(namespace).map_or(0, Namespace::len)
    }

    pub fn total_len(&self) -> usize {
        self.namespaces.values().map(Namespace::len).sum()
    }

    pub fn contains(&self, namespace: &str, id: &str) -> bool {
        self.namespaces
            .get(namespace)
            .is_some_and(|ns| ns.rows.contains_key(id))
    }

    pub fn get(&self, namespace: &str, id: &str) -> Option<EmbeddingVector> {
        let ns = self.namespaces.get(namespace)?;
        let row = *ns.rows.get(id)?;
        EmbeddingVector::new(ns.row(row, self.dim).to_vec()).ok()
    }

    /// Records of one namespace in insertion order.
    pub fn records(&self, namespace: &str) -> Vec<Record> {
        let Some(ns) = self.namespaces.get(namespace) else {
            return Vec::new();
        };
        (0..ns.len())
            .map(|i| {
                let meta = RecordMeta::new(
                    ns.ids[i].clone(),
                    ns.source_names[i].clone(),
                    self.label,
                    namespace,
                );
                let v = EmbeddingVector::new(ns.row(i, self.dim).to_vec())
                    .expect("stored vectors are validated on upsert");
                (meta, v)
            })
            .collect()
    }

    fn check_insert(&self, namespace: &str, meta: &RecordMeta, v: &EmbeddingVector) -> Result<(), StoreError> {
        validate_name(namespace)?;
        if meta.id.is_empty() {
            return Err(InterchangeError::InvalidMeta("empty id".into()).into());
        }
        if meta.label != self.label {
            return Err(StoreError::LabelMismatch {
                collection: self.name.clone(),
                id: meta.id.clone(),
                expected: self.label,
                found: meta.label,
            });
        }
        self.check_query(v)
    }

    fn check_query(&self, v: &EmbeddingVector) -> Result<(), StoreError> {
        if v.dim() != self.dim {
            return Err(StoreError::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        if v.is_zero() {
            return Err(StoreError::ZeroVector);
        }
        Ok(())
    }

    /// Inserts or replaces `(namespace, meta.id)`. Returns true on replace.
    pub fn upsert(
        &mut self,
        namespace: &str,
        meta: &RecordMeta,
        v: &EmbeddingVector,
    ) -> Result<bool, StoreError> {
        self.check_insert(namespace, meta, v)?;
        let replaced = self
            .namespaces
            .entry(namespace.to_string())
            .or_default()
            .upsert(self.dim, meta, v);
        self.generation += 1;
        Ok(replaced)
    }

    /// All-or-nothing batch upsert: every record is validated before any is
    /// applied.
    pub fn upsert_batch(
        &mut self,
        namespace: &str,
        records: &[Record],
    ) -> Result<UpsertSummary, StoreError> {
        for (meta, v) in records {
            self.check_insert(namespace, meta, v)?;
        }
        let mut summary = UpsertSummary::default();
        for (meta, v) in records {
            let replaced = self
                .namespaces
                .entry(namespace.to_string())
                .or_default()
                .upsert(self.dim, meta, v);
            if replaced {
                summary.replaced += 1;
            } else {
                summary.inserted += 1;
            }
            self.generation += 1;
        }
        Ok(summary)
    }

    /// The `k` nearest records of `namespace`, ascending by distance with
    /// ties broken by ascending id. A missing or empty namespace yields an
    /// empty result.
    pub fn query_top_k(
        &self,
        namespace: &str,
        q: &EmbeddingVector,
        k: usize,
    ) -> Result<Vec<Neighbor>, StoreError> {
        if k == 0 {
            return Err(StoreError::ZeroK);
        }
        self.check_query(q)?;
        let Some(ns) = self.namespaces.get(namespace) else {
            return Ok(Vec::new());
        };
        let n = ns.len();
        if n == 0 {
            return Ok(Vec::new());
        }

        let query = q.as_slice();
        let q_norm = norm64(query);
        let dim = self.dim;
        let score = |i: usize| (distance_with_norms(query, q_norm, ns.row(i, dim), ns.norms[i]), i);
        let mut scored: Vec<(f64, usize)> = if n >= PARALLEL_SCAN_MIN {
            (0..n).into_par_iter().map(score).collect()
        } else {
            (0..n).map(score).collect()
        };

        let cmp = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then_with(|| ns.ids[a.1].cmp(&ns.ids[b.1]))
        };
        let k = k.min(n);
        if k < n {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);

        Ok(scored
            .into_iter()
            .map(|(distance, i)| Neighbor {
                id: ns.ids[i].clone(),
                distance,
                source_name: ns.source_names[i].clone(),
            })
            .collect())
    }

    /// Minimum cosine distance from `q` to `namespace`, with the id attaining it.
    pub fn nearest_distance(
        &self,
        namespace: &str,
        q: &EmbeddingVector,
    ) -> Result<(f64, String), StoreError> {
        self.nearest(namespace, q).map(|n| (n.distance, n.id))
    }

    pub fn nearest(&self, namespace: &str, q: &EmbeddingVector) -> Result<Neighbor, StoreError> {
        self.query_top_k(namespace, q, 1)?
            .into_iter()
            .next()
            .ok_or_else(|| StoreError::EmptyNamespace {
                collection: self.name.clone(),
                namespace: namespace.to_string(),
            })
    }
}
