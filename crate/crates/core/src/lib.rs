//! Fake-news detection on heavily imbalanced text corpora.
//!
//! The crate covers the whole pipeline: corpus ingestion and splitting,
//! Bangla text cleanup, n-gram count / TF-IDF features, five resampling
//! strategies, six classifiers with optional balanced class weights,
//! stacked generalization, minority-class metrics and an experiment harness.
//!
//! Data-parallel inner loops (kNN search, per-document transforms, forest
//! training, sweep runs) use rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise. Both paths
//! produce bit-identical results.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod harness;
pub mod label;
pub mod par;
pub mod resample;
pub mod seed;
pub mod sparse;
pub mod stack;
pub mod text;
pub mod vectorize;

pub use error::{Error, Result};
pub use label::Label;
