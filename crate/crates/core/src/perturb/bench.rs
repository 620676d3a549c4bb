//! Nearest-match accuracy: the share of modified images whose nearest
//! original is their own source image, as a percentage.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PerturbError;
use crate::interchange::Record;
use crate::vecstore::Collection;

/// Separates the source id from the perturbation tag in modified ids.
pub const ID_SEPARATOR: char = '@';

pub fn modified_id(source: &str, tag: &str) -> String {
    format!("{source}{ID_SEPARATOR}{tag}")
}

/// Strips the perturbation suffix. Ids without one are their own source.
pub fn source_id(modified: &str) -> &str {
    modified
        .rsplit_once(ID_SEPARATOR)
        .map_or(modified, |(source, _)| source)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub modified_id: String,
    pub nearest_original_id: String,
    pub distance: f64,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkOutcome {
    pub matches: Vec<MatchResult>,
    pub correct: usize,
    pub total: usize,
    pub accuracy_percent: f64,
}

/// Matches every modified embedding against `namespace` of `originals`.
pub fn run_robustness_benchmark(
    originals: &Collection,
    namespace: &str,
    modified: &[Record],
) -> Result<BenchmarkOutcome, PerturbError> {
    if modified.is_empty() {
        return Err(PerturbError::NoModifiedRecords);
    }
    for (meta, _) in modified {
        let src = source_id(&meta.id);
        if !originals.contains(namespace, src) {
            return Err(PerturbError::UnknownSource {
                modified: meta.id.clone(),
                source_id: src.to_string(),
            });
        }
    }
    let matches = modified
        .par_iter()
        .map(|(meta, v)| {
            let (distance, nearest) = originals.nearest_distance(namespace, v)?;
            Ok(MatchResult {
                correct: nearest == source_id(&meta.id),
                modified_id: meta.id.clone(),
                nearest_original_id: nearest,
                distance,
            })
        })
        .collect::<Result<Vec<_>, PerturbError>>()?;
    let correct = matches.iter().filter(|m| m.correct).count();
    let total = matches.len();
    Ok(BenchmarkOutcome {
        accuracy_percent: 100.0 * correct as f64 / total as f64,
        matches,
        correct,
        total,
    })
}

/// One row of the benchmark grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub perturbation: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy_percent: f64,
}

impl BenchRow {
    pub fn new(perturbation: impl Into<String>, outcome: &BenchmarkOutcome) -> Self {
        Self {
            perturbation: perturbation.into(),
            total: outcome.total,
            correct: outcome.correct,
            accuracy_percent: outcome.accuracy_percent,
        }
    }
}

pub fn write_grid(rows: &[BenchRow], path: &Path) -> Result<(), PerturbError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["perturbation", "total", "correct", "accuracy_percent"])?;
    for r in rows {
        w.write_record([
            r.perturbation.clone(),
            r.total.to_string(),
            r.correct.to_string(),
            format!("{:.2}", r.accuracy_percent),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_details(matches: &[MatchResult], path: &Path) -> Result<(), PerturbError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["modified_id", "nearest_original_id", "distance", "correct"])?;
    for m in matches {
        w.write_record([
            m.modified_id.clone(),
            m.nearest_original_id.clone(),
            format!("{:.6}", m.distance),
            m.correct.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
