use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("k = {k} neighbors requested but only {available} candidates available")]
    KTooLarge { k: usize, available: usize },
    #[error("input contains a single class; both classes are required")]
    SingleClass,
    #[error("minority class has {0} rows; at least 2 are needed to interpolate")]
    TooFewMinority(usize),
    #[error("negative feature value {value} at row {row}, column {col}")]
    NegativeFeature { row: usize, col: usize, value: f64 },
    #[error("feature width mismatch: model expects {expected} columns, input has {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{rows} training rows exceed the kernel SVM row cap of {cap}; subsample or use another classifier")]
    RowCap { rows: usize, cap: usize },
    #[error("fold {fold} has no {label} rows in its training portion; use fewer folds")]
    FoldMissingClass { fold: usize, label: crate::Label },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
