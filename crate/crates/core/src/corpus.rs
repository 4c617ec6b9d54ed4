//! Corpus ingestion, seeded train/test splitting and experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::label::{class_counts, Label};
use crate::seed;
use crate::{Error, Result};

/// One ingested news record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArticle {
    pub id: String,
    pub headline: String,
    pub content: String,
    pub source: String,
    pub domain: String,
    pub date: String,
    pub category: String,
    pub label: Label,
}

impl RawArticle {
    pub fn new(id: impl Into<String>, content: impl Into<String>, label: Label) -> Self {
        RawArticle {
            id: id.into(),
            headline: String::new(),
            content: content.into(),
            source: String::new(),
            domain: String::new(),
            date: String::new(),
            category: String::new(),
            label,
        }
    }
}

/// A row that could not be ingested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowDiagnostic {
    /// 1-based data row number (header excluded).
    pub row: usize,
    pub message: String,
}

/// Immutable set of labeled articles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    records: Vec<RawArticle>,
    class_counts: [usize; 2],
    /// Rows dropped at ingest with the reason.
    pub rejected: Vec<RowDiagnostic>,
}

impl LabeledDataset {
    pub fn new(records: Vec<RawArticle>) -> Self {
        let labels: Vec<Label> = records.iter().map(|r| r.label).collect();
        LabeledDataset {
            class_counts: class_counts(&labels),
            records,
            rejected: Vec::new(),
        }
    }

    pub fn records(&self) -> &[RawArticle] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        self.class_counts
    }

    pub fn count(&self, label: Label) -> usize {
        self.class_counts[label.index()]
    }

    pub fn has_both_classes(&self) -> bool {
        self.class_counts.iter().all(|&c| c > 0)
    }

    /// Number of records whose content is empty after trimming.
    pub fn empty_content(&self) -> usize {
        self.records.iter().filter(|r| r.content.trim().is_empty()).count()
    }

    pub fn merge(mut self, other: LabeledDataset) -> LabeledDataset {
        self.records.extend(other.records);
        self.rejected.extend(other.rejected);
        let labels: Vec<Label> = self.records.iter().map(|r| r.label).collect();
        self.class_counts = class_counts(&labels);
        self
    }
}

/// Column-name mapping and label aliases for delimited input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub id: String,
    pub headline: String,
    pub content: String,
    pub source: String,
    pub domain: String,
    pub date: String,
    pub category: String,
    pub label: String,
    pub authentic_values: Vec<String>,
    pub fake_values: Vec<String>,
    pub delimiter: u8,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            id: "articleID".into(),
            headline: "headline".into(),
            content: "content".into(),
            source: "source".into(),
            domain: "domain".into(),
            date: "date".into(),
            category: "category".into(),
            label: "label".into(),
            authentic_values: vec!["0".into(), "authentic".into()],
            fake_values: vec!["1".into(), "fake".into()],
            delimiter: b',',
        }
    }
}

impl Schema {
    pub fn tab_separated(mut self) -> Self {
        self.delimiter = b'\t';
        self
    }

    fn parse_label(&self, raw: &str) -> Option<Label> {
        let v = raw.trim();
        let matches = |set: &[String]| set.iter().any(|a| a.eq_ignore_ascii_case(v));
        match (matches(&self.authentic_values), matches(&self.fake_values)) {
            (true, false) => Some(Label::Authentic),
            (false, true) => Some(Label::Fake),
            _ => None,
        }
    }
}

/// Reads a UTF-8 delimited file with a header row.
pub fn load_corpus(path: impl AsRef<Path>, schema: &Schema) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file, schema)
}

/// Same as [`load_corpus`] over any reader.
pub fn read_corpus<R: std::io::Read>(reader: R, schema: &Schema) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(e, 0))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let content = col(&schema.content).ok_or_else(|| Error::MissingColumn(schema.content.clone()))?;
    let label = col(&schema.label).ok_or_else(|| Error::MissingColumn(schema.label.clone()))?;
    let optional = [
        col(&schema.id),
        col(&schema.headline),
        col(&schema.source),
        col(&schema.domain),
        col(&schema.date),
        col(&schema.category),
    ];

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(e, row))?;
        let field = |c: Option<usize>| c.and_then(|c| rec.get(c)).unwrap_or("").to_string();
        let raw_label = rec.get(label).unwrap_or("");
        let Some(lab) = schema.parse_label(raw_label) else {
            rejected.push(RowDiagnostic {
                row,
                message: format!("unrecognised label `{raw_label}`"),
            });
            continue;
        };
        let id = match optional[0] {
            Some(c) => rec.get(c).unwrap_or("").to_string(),
            None => row.to_string(),
        };
        records.push(RawArticle {
            id,
            headline: field(optional[1]),
            content: rec.get(content).unwrap_or("").to_string(),
            source: field(optional[2]),
            domain: field(optional[3]),
            date: field(optional[4]),
            category: field(optional[5]),
            label: lab,
        });
    }
    if !rejected.is_empty() {
        warn!("{} rows rejected for unrecognised labels", rejected.len());
    }
    let mut ds = LabeledDataset::new(records);
    if ds.empty_content() > 0 {
        warn!("{} records have empty content", ds.empty_content());
    }
    ds.rejected = rejected;
    Ok(ds)
}

fn csv_error(e: csv::Error, fallback_row: usize) -> Error {
    let row = e
        .position()
        .map(|p| (p.record() as usize).max(fallback_row))
        .unwrap_or(fallback_row);
    Error::Parse {
        row,
        message: e.to_string(),
    }
}

/// Per-class train counts: each class gets `round(n_c * fraction)` and the
/// largest class absorbs whatever keeps the total at `round(n * fraction)`.
pub fn stratified_train_counts(counts: [usize; 2], fraction: f64) -> [usize; 2] {
    let total: usize = counts.iter().sum();
    let target = (total as f64 * fraction).round() as usize;
    let largest = if counts[0] >= counts[1] { 0 } else { 1 };
    let other = 1 - largest;
    let other_train = ((counts[other] as f64 * fraction).round() as usize).min(counts[other]);
    let largest_train = target.saturating_sub(other_train).min(counts[largest]);
    let mut out = [0; 2];
    out[largest] = largest_train;
    out[other] = other_train;
    out
}

/// Seeded train/test partition. Both halves keep the input record order.
pub fn split(
    dataset: &LabeledDataset,
    train_fraction: f64,
    seed_value: u64,
    stratified: bool,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train_idx, test_idx) = split_indices(
        &dataset.records.iter().map(|r| r.label).collect::<Vec<_>>(),
        train_fraction,
        seed_value,
        stratified,
    )?;
    let take = |idx: &[usize]| {
        LabeledDataset::new(idx.iter().map(|&i| dataset.records[i].clone()).collect())
    };
    Ok((take(&train_idx), take(&test_idx)))
}

/// Index form of [`split`], usable on anything with a label vector.
pub fn split_indices(
    labels: &[Label],
    train_fraction: f64,
    seed_value: u64,
    stratified: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let mut rng = seed::rng(seed_value);
    let mut in_train = vec![false; labels.len()];
    if stratified {
        let counts = class_counts(labels);
        if counts.contains(&0) && !labels.is_empty() {
            warn!("stratified split: one class has no records");
        }
        let quota = stratified_train_counts(counts, train_fraction);
        for label in Label::ALL {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
            members.shuffle(&mut rng);
            for &i in &members[..quota[label.index()]] {
                in_train[i] = true;
            }
        }
    } else {
        let mut all: Vec<usize> = (0..labels.len()).collect();
        all.shuffle(&mut rng);
        let n_train = (labels.len() as f64 * train_fraction).round() as usize;
        for &i in &all[..n_train] {
            in_train[i] = true;
        }
    }
    let train = (0..labels.len()).filter(|&i| in_train[i]).collect();
    let test = (0..labels.len()).filter(|&i| !in_train[i]).collect();
    Ok((train, test))
}

macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let t = s.trim().to_ascii_lowercase();
                $(if t == $text $(|| t == $alias)* { return Ok($name::$variant); })+
                Err(Error::Config(format!(
                    "unknown {} `{}` (expected one of: {})",
                    stringify!($name),
                    s,
                    [$($text),+].join(", ")
                )))
            }
        }
    };
}

string_enum!(
    /// Imbalance-handling strategy of one experiment.
    Method {
        Baseline => "baseline",
        RandomOver => "random_over" | "random-over" | "ros",
        Smote => "smote",
        Adasyn => "adasyn",
        RandomUnder => "random_under" | "random-under" | "rus",
        NearMiss => "nearmiss" | "near_miss" | "near-miss",
        ClassWeight => "class_weight" | "class-weight",
        Stacking => "stacking" | "stack",
    }
);

impl Method {
    pub fn is_oversampler(self) -> bool {
        matches!(self, Method::RandomOver | Method::Smote | Method::Adasyn)
    }

    pub fn is_undersampler(self) -> bool {
        matches!(self, Method::RandomUnder | Method::NearMiss)
    }
}

string_enum!(
    VectorizerKind {
        Count => "count",
        Tfidf => "tfidf" | "tf-idf" | "tf_idf",
    }
);

string_enum!(
    ClassifierKind {
        Lr => "lr" | "logreg",
        Svm => "svm",
        Mnb => "mnb",
        Bnb => "bnb",
        Rfc => "rfc" | "rf",
        Dtc => "dtc" | "dt",
    }
);

impl ClassifierKind {
    /// Report order used throughout: LR, SVM, MNB, BNB, RFC, DTC.
    pub const REPORT_ORDER: [ClassifierKind; 6] = [
        ClassifierKind::Lr,
        ClassifierKind::Svm,
        ClassifierKind::Mnb,
        ClassifierKind::Bnb,
        ClassifierKind::Rfc,
        ClassifierKind::Dtc,
    ];

    pub fn upper(self) -> &'static str {
        match self {
            ClassifierKind::Lr => "LR",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Mnb => "MNB",
            ClassifierKind::Bnb => "BNB",
            ClassifierKind::Rfc => "RFC",
            ClassifierKind::Dtc => "DTC",
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub vectorizer: VectorizerKind,
    pub classifier: ClassifierKind,
    /// `None` selects the protocol default: 0.7 for oversamplers, 0.8 otherwise.
    pub split_ratio: Option<f64>,
    pub stratified: bool,
    /// Oversample the test split too (independent seed, fit on test only).
    pub oversample_test: bool,
    /// Undersample the test split too, mirroring undersampling of the whole
    /// corpus before splitting.
    pub undersample_test: bool,
    pub seed: u64,
    pub k_neighbors: usize,
    pub nearmiss_version: u8,
    pub nearmiss_ver3_neighbors: usize,
    pub adasyn_beta: f64,
    pub ngram_lo: usize,
    pub ngram_hi: usize,
    /// Apply the n-gram range to the count vectorizer as well (else unigrams).
    pub count_ngrams: bool,
    pub nb_alpha: f64,
    /// `None` means 1/N.
    pub lr_lambda: Option<f64>,
    pub lr_max_epochs: usize,
    pub svm_gamma: f64,
    pub svm_c: f64,
    pub svm_row_cap: usize,
    pub rf_estimators: usize,
    pub dt_max_depth: usize,
    pub stack_folds: usize,
    pub stack_hard_labels: bool,
    pub stack_exclude_meta: bool,
    pub stack_meta: ClassifierKind,
    pub stopwords: Option<String>,
    pub stemmer_rules: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::Baseline,
            vectorizer: VectorizerKind::Tfidf,
            classifier: ClassifierKind::Lr,
            split_ratio: None,
            stratified: true,
            oversample_test: false,
            undersample_test: true,
            seed: 42,
            k_neighbors: 5,
            nearmiss_version: 1,
            nearmiss_ver3_neighbors: 3,
            adasyn_beta: 1.0,
            ngram_lo: 1,
            ngram_hi: 2,
            count_ngrams: true,
            nb_alpha: 0.01,
            lr_lambda: None,
            lr_max_epochs: 1000,
            svm_gamma: 1.0,
            svm_c: 1.0,
            svm_row_cap: 20_000,
            rf_estimators: 400,
            dt_max_depth: 6,
            stack_folds: 5,
            stack_hard_labels: false,
            stack_exclude_meta: false,
            stack_meta: ClassifierKind::Rfc,
            stopwords: None,
            stemmer_rules: None,
        }
    }
}

impl ExperimentConfig {
    /// Train fraction after applying the protocol default.
    pub fn train_fraction(&self) -> f64 {
        self.split_ratio
            .unwrap_or(if self.method.is_oversampler() { 0.7 } else { 0.8 })
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.train_fraction();
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidFraction(f));
        }
        if self.k_neighbors == 0 {
            return Err(Error::Config("k_neighbors must be at least 1".into()));
        }
        if !(1..=3).contains(&self.nearmiss_version) {
            return Err(Error::Config(format!(
                "nearmiss_version must be 1, 2 or 3, got {}",
                self.nearmiss_version
            )));
        }
        if !(self.adasyn_beta > 0.0 && self.adasyn_beta <= 1.0) {
            return Err(Error::Config(format!("adasyn_beta must be in (0, 1], got {}", self.adasyn_beta)));
        }
        if self.ngram_lo == 0 || self.ngram_lo > self.ngram_hi {
            return Err(Error::Config(format!(
                "invalid n-gram range ({}, {})",
                self.ngram_lo, self.ngram_hi
            )));
        }
        if self.nb_alpha <= 0.0 {
            return Err(Error::Config("nb_alpha must be positive".into()));
        }
        if self.stack_folds < 2 {
            return Err(Error::Config("stack_folds must be at least 2".into()));
        }
        if self.rf_estimators == 0 {
            return Err(Error::Config("rf_estimators must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
        }
        fn boolean(key: &str, v: &str) -> Result<bool> {
            match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(Error::Config(format!("invalid boolean `{v}` for `{key}`"))),
            }
        }
        let v = value.trim();
        match key.trim() {
            "method" => self.method = v.parse()?,
            "vectorizer" => self.vectorizer = v.parse()?,
            "classifier" => self.classifier = v.parse()?,
            "split_ratio" => {
                self.split_ratio = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(num(key, v)?)
                }
            }
            "stratified" => self.stratified = boolean(key, v)?,
            "oversample_test" => self.oversample_test = boolean(key, v)?,
            "undersample_test" => self.undersample_test = boolean(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "k_neighbors" => self.k_neighbors = num(key, v)?,
            "nearmiss_version" => self.nearmiss_version = num(key, v)?,
            "nearmiss_ver3_neighbors" => self.nearmiss_ver3_neighbors = num(key, v)?,
            "adasyn_beta" => self.adasyn_beta = num(key, v)?,
            "ngram_range" => {
                let (lo, hi) = v
                    .trim_matches(|c| c == '(' || c == ')')
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("ngram_range must look like `1,2`, got `{v}`")))?;
                self.ngram_lo = num(key, lo.trim())?;
                self.ngram_hi = num(key, hi.trim())?;
            }
            "count_ngrams" => self.count_ngrams = boolean(key, v)?,
            "nb_alpha" => self.nb_alpha = num(key, v)?,
            "lr_lambda" => {
                self.lr_lambda = if v.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(num(key, v)?)
                }
            }
            "lr_max_epochs" => self.lr_max_epochs = num(key, v)?,
            "svm_gamma" => self.svm_gamma = num(key, v)?,
            "svm_c" => self.svm_c = num(key, v)?,
            "svm_row_cap" => self.svm_row_cap = num(key, v)?,
            "rf_estimators" => self.rf_estimators = num(key, v)?,
            "dt_max_depth" => self.dt_max_depth = num(key, v)?,
            "stack_folds" => self.stack_folds = num(key, v)?,
            "stack_hard_labels" => self.stack_hard_labels = boolean(key, v)?,
            "stack_exclude_meta" => self.stack_exclude_meta = boolean(key, v)?,
            "stack_meta" => self.stack_meta = v.parse()?,
            "stopwords" => self.stopwords = Some(v.to_string()),
            "stemmer_rules" => self.stemmer_rules = Some(v.to_string()),
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` text. Blank lines and `#` comments are skipped.
    /// Keys not belonging to the experiment (e.g. `corpus`, schema keys) are
    /// returned untouched for the caller.
    pub fn parse_with_extras(text: &str) -> Result<(Self, BTreeMap<String, String>)> {
        let mut cfg = ExperimentConfig::default();
        let mut extras = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                row: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if EXTRA_KEYS.contains(&k) {
                extras.insert(k.to_string(), v.to_string());
            } else {
                cfg.set(k, v).map_err(|e| Error::Parse {
                    row: n + 1,
                    message: e.to_string(),
                })?;
            }
        }
        Ok((cfg, extras))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, BTreeMap<String, String>)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_extras(&text)
    }
}

/// Config keys that describe inputs rather than the experiment itself.
pub const EXTRA_KEYS: &[&str] = &[
    "corpus",
    "content_column",
    "label_column",
    "id_column",
    "fake_labels",
    "authentic_labels",
    "delimiter",
];

impl Schema {
    /// Applies the schema-related extras from a config file.
    pub fn apply_extras(&mut self, extras: &BTreeMap<String, String>) -> Result<()> {
        let list = |v: &str| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        for (k, v) in extras {
            match k.as_str() {
                "content_column" => self.content = v.clone(),
                "label_column" => self.label = v.clone(),
                "id_column" => self.id = v.clone(),
                "fake_labels" => self.fake_values = list(v),
                "authentic_labels" => self.authentic_values = list(v),
                "delimiter" => {
                    self.delimiter = match v.as_str() {
                        "tab" | "\\t" => b'\t',
                        "comma" | "," => b',',
                        s if s.len() == 1 => s.as_bytes()[0],
                        other => return Err(Error::Config(format!("unsupported delimiter `{other}`"))),
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "articleID,content,label\n1,ক খ,0\n2,গ,0\n3,ঘ ঙ,1\n";

    #[test]
    fn three_row_fixture_counts() {
        let ds = read_corpus(FIXTURE.as_bytes(), &Schema::default()).unwrap();
        assert_eq!(ds.class_counts(), [2, 1]);
        assert_eq!(ds.records()[2].id, "3");
    }

    #[test]
    fn empty_file_with_header() {
        let ds = read_corpus("articleID,content,label\n".as_bytes(), &Schema::default()).unwrap();
        assert_eq!(ds.len(), 0);
        assert_eq!(ds.class_counts(), [0, 0]);
        assert!(!ds.has_both_classes());
    }

    #[test]
    fn missing_mandatory_column() {
        let err = read_corpus("articleID,text,label\n1,x,0\n".as_bytes(), &Schema::default()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "content"));
    }

    #[test]
    fn malformed_row_reports_row_number() {
        let err = read_corpus("content,label\nক,0\nখ,0,extra\n".as_bytes(), &Schema::default()).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_labels_are_rejected_per_row() {
        let ds = read_corpus("content,label\nক,0\nখ,maybe\nগ,fake\n".as_bytes(), &Schema::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.rejected, vec![RowDiagnostic { row: 2, message: "unrecognised label `maybe`".into() }]);
        assert_eq!(ds.class_counts(), [1, 1]);
    }

    #[test]
    fn label_aliases_and_tabs() {
        let mut schema = Schema::default().tab_separated();
        schema.fake_values = vec!["0".into()];
        schema.authentic_values = vec!["1".into()];
        let ds = read_corpus("content\tlabel\nক\t1\nখ\t0\n".as_bytes(), &schema).unwrap();
        assert_eq!(ds.records()[0].label, Label::Authentic);
        assert_eq!(ds.records()[1].label, Label::Fake);
        assert_eq!(ds.records()[0].id, "1");
    }

    #[test]
    fn empty_content_is_flagged_not_rejected() {
        let ds = read_corpus("content,label\n,0\nক,1\n".as_bytes(), &Schema::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.empty_content(), 1);
    }

    #[test]
    fn table_two_stratified_counts() {
        assert_eq!(stratified_train_counts([48_678, 1_299], 0.7), [34_075, 909]);
        assert_eq!(48_678 - 34_075, 14_603);
        assert_eq!(1_299 - 909, 390);
    }

    fn ten_records() -> LabeledDataset {
        let recs = (0..10)
            .map(|i| RawArticle::new(i.to_string(), "ক", if i < 8 { Label::Authentic } else { Label::Fake }))
            .collect();
        LabeledDataset::new(recs)
    }

    #[test]
    fn ten_record_split_is_deterministic() {
        let ds = ten_records();
        let (a, b) = split(&ds, 0.8, 42, true).unwrap();
        let (c, d) = split(&ds, 0.8, 42, true).unwrap();
        assert_eq!(a, c);
        assert_eq!(b, d);
        assert_eq!(a.len(), 8);
        // round(2 * 0.8) = 2 minority rows; the majority takes the remaining 6.
        assert_eq!(a.class_counts(), [6, 2]);
        assert_eq!(b.class_counts(), [2, 0]);
    }

    #[test]
    fn fraction_near_one_keeps_union() {
        let ds = ten_records();
        let (a, b) = split(&ds, 1.0 - 1e-9, 1, true).unwrap();
        assert_eq!(a.len() + b.len(), 10);
        assert!(split(&ds, 1.0, 1, true).is_err());
        assert!(split(&ds, 0.0, 1, false).is_err());
    }

    #[test]
    fn config_file_round() {
        let text = "# comment\nmethod = smote\nvectorizer=count\nclassifier = LR\noversample_test = true\nngram_range = (1, 1)\ncorpus = data.csv\nfake_labels = 0\n";
        let (cfg, extras) = ExperimentConfig::parse_with_extras(text).unwrap();
        assert_eq!(cfg.method, Method::Smote);
        assert_eq!(cfg.vectorizer, VectorizerKind::Count);
        assert_eq!(cfg.classifier, ClassifierKind::Lr);
        assert!(cfg.oversample_test);
        assert_eq!((cfg.ngram_lo, cfg.ngram_hi), (1, 1));
        assert_eq!(cfg.train_fraction(), 0.7);
        assert_eq!(extras["corpus"], "data.csv");
        let mut schema = Schema::default();
        schema.apply_extras(&extras).unwrap();
        assert_eq!(schema.fake_values, vec!["0".to_string()]);
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = ExperimentConfig::parse_with_extras("seed = 1\nmethod = magic\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        assert!(ExperimentConfig::parse_with_extras("nonsense\n").is_err());
    }

    #[test]
    fn protocol_default_split() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.train_fraction(), 0.8);
        cfg.method = Method::Adasyn;
        assert_eq!(cfg.train_fraction(), 0.7);
        cfg.split_ratio = Some(0.5);
        assert_eq!(cfg.train_fraction(), 0.5);
    }
}
