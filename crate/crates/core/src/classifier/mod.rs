//! Nearest-distance decision rule over an AI and a human collection.
//!
//! A query is AI iff its minimum cosine distance to the AI set is no larger
//! than its minimum distance to the human set. Distances are converted to
//! similarities (`1 - distance`) at this boundary; ties go to AI.

mod metrics;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interchange::{EmbeddingVector, Label};
use crate::vecstore::{Collection, StoreError};

pub use metrics::{ConfusionMatrix, MetricsSummary};
pub use report::{read_report, write_report, ReportRow, REPORT_HEADER};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("not determinable: {0}")]
    NotDeterminable(String),
    #[error("empty test set")]
    EmptyTestSet,
    #[error("collection {collection:?} is labeled {found}, expected {expected}")]
    WrongCollection {
        collection: String,
        expected: Label,
        found: Label,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("report: {0}")]
    Report(#[from] csv::Error),
    #[error("report row {row}: {reason}")]
    BadReportRow { row: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One classified input, shaped like a row of the prediction report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub source_name: String,
    pub true_label: Option<Label>,
    pub human_similarity: f64,
    pub ai_similarity: f64,
    pub predicted_label: Label,
    pub nearest_ai_id: String,
    pub nearest_human_id: String,
    pub verified_on_ledger: Option<bool>,
}

impl PredictionRecord {
    pub fn with_source(mut self, source_name: impl Into<String>) -> Self {
        self.source_name = source_name.into();
        self
    }

    pub fn with_truth(mut self, label: Label) -> Self {
        self.true_label = Some(label);
        self
    }
}

/// The decision rule in similarity space: AI iff `ai >= human`.
pub fn classify_scores(human_similarity: f64, ai_similarity: f64) -> Label {
    if ai_similarity >= human_similarity {
        Label::Ai
    } else {
        Label::Human
    }
}

fn expect_label(c: &Collection, expected: Label) -> Result<(), ClassifyError> {
    if c.label() == expected {
        Ok(())
    } else {
        Err(ClassifyError::WrongCollection {
            collection: c.name().to_string(),
            expected,
            found: c.label(),
        })
    }
}

/// Classifies `q` against the `namespace` partition of both collections.
pub fn classify(
    q: &EmbeddingVector,
    ai: &Collection,
    human: &Collection,
    namespace: &str,
) -> Result<PredictionRecord, ClassifyError> {
    expect_label(ai, Label::Ai)?;
    expect_label(human, Label::Human)?;
    let nearest = |c: &Collection| match c.nearest(namespace, q) {
        Err(StoreError::EmptyNamespace { collection, namespace }) => Err(
            ClassifyError::NotDeterminable(format!(
                "namespace {namespace:?} of collection {collection:?} is empty"
            )),
        ),
        other => other.map_err(ClassifyError::from),
    };
    let near_ai = nearest(ai)?;
    let near_human = nearest(human)?;

    let ai_similarity = 1.0 - near_ai.distance;
    let human_similarity = 1.0 - near_human.distance;
    Ok(PredictionRecord {
        source_name: String::new(),
        true_label: None,
        human_similarity,
        ai_similarity,
        predicted_label: classify_scores(human_similarity, ai_similarity),
        nearest_ai_id: near_ai.id,
        nearest_human_id: near_human.id,
        verified_on_ledger: None,
    })
}

/// Outcome of classifying a labeled test set.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub matrix: ConfusionMatrix,
    pub metrics: MetricsSummary,
    pub records: Vec<PredictionRecord>,
}

/// Classifies every test vector and tallies with AI as the positive class.
pub fn evaluate(
    test_ai: &[EmbeddingVector],
    test_human: &[EmbeddingVector],
    ai: &Collection,
    human: &Collection,
    namespace: &str,
) -> Result<Evaluation, ClassifyError> {
    if test_ai.is_empty() && test_human.is_empty() {
        return Err(ClassifyError::EmptyTestSet);
    }
    let labeled: Vec<(Label, &EmbeddingVector)> = test_ai
        .iter()
        .map(|v| (Label::Ai, v))
        .chain(test_human.iter().map(|v| (Label::Human, v)))
        .collect();
    let records = labeled
        .par_iter()
        .map(|&(truth, v)| classify(v, ai, human, namespace).map(|r| r.with_truth(truth)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut matrix = ConfusionMatrix::default();
    for r in &records {
        matrix.record(r.true_label.expect("set above"), r.predicted_label);
    }
    Ok(Evaluation {
        metrics: matrix.summary(),
        matrix,
        records,
    })
}
