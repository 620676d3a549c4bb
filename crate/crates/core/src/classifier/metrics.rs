use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interchange::Label;

/// Binary confusion counts with AI ("fake") as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_positive: u64,
    #[serde(rename = "fp")]
    pub false_positive: u64,
    #[serde(rename = "tn")]
    pub true_negative: u64,
    #[serde(rename = "fn")]
    pub false_negative: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self {
            true_positive: tp,
            false_positive: fp,
            true_negative: tn,
            false_negative: fn_,
        }
    }

    /// Builds the matrix from per-class correct counts, the way results are
    /// usually quoted ("n of N fake images correctly classified").
    pub fn from_class_counts(
        ai_correct: u64,
        ai_total: u64,
        human_correct: u64,
        human_total: u64,
    ) -> Self {
        Self::new(
            ai_correct,
            human_total - human_correct,
            human_correct,
            ai_total - ai_correct,
        )
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Ai, Label::Ai) => self.true_positive += 1,
            (Label::Ai, Label::Human) => self.false_negative += 1,
            (Label::Human, Label::Ai) => self.false_positive += 1,
            (Label::Human, Label::Human) => self.true_negative += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    pub fn summary(&self) -> MetricsSummary {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        MetricsSummary {
            precision: ratio(self.true_positive, self.true_positive + self.false_positive),
            recall: ratio(self.true_positive, self.true_positive + self.false_negative),
            accuracy: ratio(self.true_positive + self.true_negative, self.total()),
        }
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.total().to_string().len().max(9);
        writeln!(f, "{:>14} {:>w$} {:>w$}", "", "pred fake", "pred real")?;
        writeln!(
            f,
            "{:>14} {:>w$} {:>w$}",
            "true fake", self.true_positive, self.false_negative
        )?;
        write!(
            f,
            "{:>14} {:>w$} {:>w$}",
            "true real", self.false_positive, self.true_negative
        )
    }
}

/// Precision, recall and accuracy. `None` marks a zero denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
}

impl fmt::Display for MetricsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        write!(
            f,
            "precision={} recall={} accuracy={}",
            show(self.precision),
            show(self.recall),
            show(self.accuracy)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cifake_counts_accuracy() {
        let m = ConfusionMatrix::from_class_counts(4792, 10_000, 6194, 10_000);
        assert_eq!(m, ConfusionMatrix::new(4792, 3806, 6194, 5208));
        let acc = m.summary().accuracy.unwrap();
        assert!((acc - 0.5493).abs() <= 1e-4);
        assert!((acc - (4792.0 + 6194.0) / 20_000.0).abs() < 1e-12);
    }

    #[test]
    fn faces_counts_recall() {
        let m = ConfusionMatrix::from_class_counts(236, 10_000, 9452, 10_000);
        assert_eq!(m, ConfusionMatrix::new(236, 548, 9452, 9764));
        assert!((m.summary().recall.unwrap() - 0.0236).abs() <= 1e-4);
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let m = ConfusionMatrix::new(0, 0, 5, 0);
        let s = m.summary();
        assert_eq!(s.precision, None);
        assert_eq!(s.recall, None);
        assert_eq!(s.accuracy, Some(1.0));
        assert_eq!(ConfusionMatrix::default().summary().accuracy, None);
        assert!(s.to_string().contains("precision=undefined"));
    }

    #[test]
    fn serializes_short_field_names() {
        let json = serde_json::to_value(ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        assert_eq!(json["tp"], 1);
        assert_eq!(json["fn"], 4);
    }
}
