use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::{RunStatus, SweepReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Table,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            other => Err(Error::Config(format!("unknown report format `{other}` (csv, json, table)"))),
        }
    }
}

fn render(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut cols = vec![0; width];
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            cols[i] = cols[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for (n, r) in rows.iter().enumerate() {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c}{}", " ".repeat(cols[i] - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if n == 0 {
            let _ = writeln!(out, "{}", cols.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
        }
    }
    out
}

fn f3(v: f64) -> String {
    format!("{v:.3}")
}

/// Aligned plain-text tables: every run, then the best classifier per row.
pub fn to_table(report: &SweepReport) -> String {
    let mut rows = vec![["Method", "Features", "Classifier", "Train", "Test", "Accuracy", "Precision", "Recall", "F1", "Status"]
        .map(String::from)
        .to_vec()];
    for e in &report.entries {
        let c = &e.config;
        let mut row = vec![e.label.clone(), c.vectorizer.to_string(), c.classifier.upper().to_string()];
        match &e.result {
            Some(r) => {
                let m = &r.metrics;
                row.extend([
                    format!("{}/{}", r.train_counts[0], r.train_counts[1]),
                    format!("{}/{}", r.test_counts[0], r.test_counts[1]),
                    f3(m.accuracy),
                    f3(m.precision),
                    f3(m.recall),
                    f3(m.f1),
                    if r.warnings.is_empty() { "ok".into() } else { format!("ok ({} warnings)", r.warnings.len()) },
                ]);
            }
            None => {
                row.extend(["-", "-", "-", "-", "-", "-"].map(String::from));
                let status = match e.status {
                    RunStatus::Skipped => "skipped",
                    _ => "failed",
                };
                row.push(format!("{status}: {}", e.reason.as_deref().unwrap_or("")));
            }
        }
        rows.push(row);
    }
    let mut out = render(&rows);
    if !report.summary.is_empty() {
        let mut best = vec![["Method", "Features", "Classifier", "F1"].map(String::from).to_vec()];
        for s in &report.summary {
            best.push(vec![
                s.label.clone(),
                s.vectorizer.to_string(),
                s.classifiers.iter().map(|k| k.upper()).collect::<Vec<_>>().join(", "),
                f3(s.f1),
            ]);
        }
        out.push('\n');
        out.push_str(&render(&best));
    }
    out
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("report serialization failed: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// One line per run.
pub fn to_csv(report: &SweepReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method", "label", "oversample_test", "vectorizer", "classifier", "status", "train_fraction", "seed",
        "train_authentic", "train_fake", "test_authentic", "test_fake", "vocab_size", "accuracy", "precision",
        "recall", "f1", "tp", "fp", "fn", "tn", "positive_class", "degenerate", "note",
    ])
    .map_err(csv_error)?;
    for e in &report.entries {
        let c = &e.config;
        let mut rec = vec![
            c.method.to_string(),
            e.label.clone(),
            c.oversample_test.to_string(),
            c.vectorizer.to_string(),
            c.classifier.to_string(),
            format!("{:?}", e.status).to_lowercase(),
            c.train_fraction().to_string(),
            c.seed.to_string(),
        ];
        match &e.result {
            Some(r) => {
                let m = &r.metrics;
                rec.extend([
                    r.train_counts[0].to_string(),
                    r.train_counts[1].to_string(),
                    r.test_counts[0].to_string(),
                    r.test_counts[1].to_string(),
                    r.vocab_size.to_string(),
                    m.accuracy.to_string(),
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.f1.to_string(),
                    m.confusion.tp.to_string(),
                    m.confusion.fp.to_string(),
                    m.confusion.fn_.to_string(),
                    m.confusion.tn.to_string(),
                    m.positive_class.to_string(),
                    m.degenerate.to_string(),
                    r.warnings.join("; "),
                ]);
            }
            None => {
                rec.extend(std::iter::repeat_n(String::new(), 15));
                rec.push(e.reason.clone().unwrap_or_default());
            }
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    finish(w)
}

/// Best classifier per (method row, vectorizer).
pub fn summary_csv(report: &SweepReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "vectorizer", "classifier", "f1"]).map_err(csv_error)?;
    for s in &report.summary {
        w.write_record([
            s.label.clone(),
            s.vectorizer.to_string(),
            s.classifiers.iter().map(|k| k.upper()).collect::<Vec<_>>().join(", "),
            s.f1.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

pub fn to_json(report: &SweepReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(csv_error)
}

#[derive(Serialize)]
struct RunTimings<'a> {
    label: &'a str,
    vectorizer: String,
    classifier: &'a str,
    stages: &'a [super::StageTiming],
}

/// Per-stage wall-clock seconds of every completed run. Not reproducible by nature.
pub fn timings_json(report: &SweepReport) -> Result<String> {
    let runs: Vec<RunTimings<'_>> = report
        .entries
        .iter()
        .filter_map(|e| {
            e.result.as_ref().map(|r| RunTimings {
                label: &e.label,
                vectorizer: e.config.vectorizer.to_string(),
                classifier: e.config.classifier.upper(),
                stages: &r.timings,
            })
        })
        .collect();
    serde_json::to_string_pretty(&runs).map_err(csv_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_parse() {
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn empty_report_renders() {
        let r = SweepReport::default();
        assert_eq!(to_table(&r).lines().count(), 2);
        assert_eq!(to_csv(&r).unwrap().lines().count(), 1);
        assert_eq!(to_json(&r).unwrap(), "{\n  \"entries\": [],\n  \"summary\": []\n}");
    }
}
