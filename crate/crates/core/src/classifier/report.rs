//! CSV prediction report: one row per classified input, labels in the
//! real/fake vocabulary, similarities to four decimals.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{ClassifyError, PredictionRecord};
use crate::interchange::Label;

pub const REPORT_HEADER: [&str; 6] = [
    "filename",
    "true_label",
    "human_similarity",
    "ai_similarity",
    "predicted_label",
    "verified",
];

/// A parsed report row. Similarities are exactly what the file holds
/// (rounded to four decimals).
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub filename: String,
    pub true_label: Option<Label>,
    pub human_similarity: f64,
    pub ai_similarity: f64,
    pub predicted_label: Label,
    pub verified: Option<bool>,
}

impl From<&PredictionRecord> for ReportRow {
    fn from(r: &PredictionRecord) -> Self {
        let round4 = |x: f64| format!("{x:.4}").parse().expect("formatted float parses");
        Self {
            filename: r.source_name.clone(),
            true_label: r.true_label,
            human_similarity: round4(r.human_similarity),
            ai_similarity: round4(r.ai_similarity),
            predicted_label: r.predicted_label,
            verified: r.verified_on_ledger,
        }
    }
}

pub fn write_report(records: &[PredictionRecord], path: &Path) -> Result<(), ClassifyError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(REPORT_HEADER)?;
    for r in records {
        let human = format!("{:.4}", r.human_similarity);
        let ai = format!("{:.4}", r.ai_similarity);
        let verified = match r.verified_on_ledger {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        w.write_record([
            r.source_name.as_str(),
            r.true_label.map_or("", Label::report_str),
            &human,
            &ai,
            r.predicted_label.report_str(),
            verified,
        ])?;
    }
    let mut inner = w.into_inner().map_err(|e| e.into_error())?;
    inner.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>, ClassifyError> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    let headers = r.headers()?.clone();
    if headers.iter().ne(REPORT_HEADER) {
        return Err(ClassifyError::BadReportRow {
            row: 0,
            reason: format!("unexpected header {:?}", headers),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |reason: String| ClassifyError::BadReportRow { row, reason };
        let label = |s: &str| Label::from_report_str(s).ok_or_else(|| bad(format!("bad label {s:?}")));
        let sim = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad similarity {s:?}: {e}")));
        rows.push(ReportRow {
            filename: rec[0].to_string(),
            true_label: if rec[1].is_empty() { None } else { Some(label(&rec[1])?) },
            human_similarity: sim(&rec[2])?,
            ai_similarity: sim(&rec[3])?,
            predicted_label: label(&rec[4])?,
            verified: match &rec[5] {
                "" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(bad(format!("bad verified flag {other:?}"))),
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PredictionRecord {
        PredictionRecord {
            source_name: "0375 (7).jpg".into(),
            true_label: Some(Label::Human),
            human_similarity: 0.2266,
            ai_similarity: 0.1677,
            predicted_label: Label::Human,
            nearest_ai_id: "a".into(),
            nearest_human_id: "h".into(),
            verified_on_ledger: None,
        }
    }

    #[test]
    fn sample_row_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&[sample()], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "filename,true_label,human_similarity,ai_similarity,predicted_label,verified\n\
             0375 (7).jpg,real,0.2266,0.1677,real,\n"
        );
    }

    #[test]
    fn empty_report_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&[], &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "filename,true_label,human_similarity,ai_similarity,predicted_label,verified\n"
        );
        assert!(read_report(&path).unwrap().is_empty());
    }

    #[test]
    fn verified_flag_and_missing_truth() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut r = sample();
        r.true_label = None;
        r.verified_on_ledger = Some(true);
        r.source_name = "a,b.png".into();
        write_report(&[r.clone()], &path).unwrap();
        let rows = read_report(&path).unwrap();
        assert_eq!(rows, vec![ReportRow::from(&r)]);
    }
}
