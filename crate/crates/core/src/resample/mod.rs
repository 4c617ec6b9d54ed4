//! Class rebalancing: random / SMOTE / ADASYN oversampling and random /
//! NearMiss undersampling.
//!
//! Every resampler returns the rebalanced [`FeatureMatrix`] together with the
//! provenance of each output row, which is what the geometry and
//! conservation checks are written against.

mod knn;
mod over;
mod under;

pub use knn::{knn, knn_self, Neighbor, NeighborIndex};
pub use over::{adasyn, random_oversample, smote};
pub use under::{nearmiss, random_undersample};

use serde::{Deserialize, Serialize};

use crate::label::{minority_label, Label};
use crate::sparse::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResampleMethod {
    RandomOver,
    Smote,
    Adasyn,
    RandomUnder,
    NearMiss,
}

impl ResampleMethod {
    pub fn is_oversampler(self) -> bool {
        matches!(self, Self::RandomOver | Self::Smote | Self::Adasyn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub method: ResampleMethod,
    pub k_neighbors: usize,
    pub nearmiss_version: u8,
    /// Majority neighbors gathered per minority point in NearMiss-3's first step.
    pub nearmiss_ver3_neighbors: usize,
    pub beta: f64,
    pub seed: u64,
}

impl ResamplePlan {
    pub fn new(method: ResampleMethod, seed: u64) -> Self {
        ResamplePlan {
            method,
            k_neighbors: 5,
            nearmiss_version: 1,
            nearmiss_ver3_neighbors: 3,
            beta: 1.0,
            seed,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k_neighbors = k;
        self
    }

    pub fn with_version(mut self, v: u8) -> Self {
        self.nearmiss_version = v;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::Config("k_neighbors must be at least 1".into()));
        }
        if !(1..=3).contains(&self.nearmiss_version) {
            return Err(Error::Config(format!("unknown NearMiss version {}", self.nearmiss_version)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config(format!("beta must be in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }
}

/// Where an output row came from, in terms of input row ids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RowOrigin {
    Original(usize),
    Duplicate(usize),
    /// `base + lambda * (neighbor - base)`.
    Synthetic { base: usize, neighbor: usize, lambda: f64 },
}

#[derive(Debug, Clone)]
pub struct Resampled {
    pub data: FeatureMatrix,
    pub origin: Vec<RowOrigin>,
    pub warnings: Vec<String>,
}

impl Resampled {
    fn unchanged(data: &FeatureMatrix) -> Self {
        Resampled {
            data: data.clone(),
            origin: (0..data.n_rows()).map(RowOrigin::Original).collect(),
            warnings: Vec::new(),
        }
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// (minority label, minority count, majority count); errors when a class is absent.
pub(crate) fn class_split(data: &FeatureMatrix) -> Result<(Label, usize, usize)> {
    let counts = data.class_counts();
    if counts.contains(&0) {
        return Err(Error::SingleClass);
    }
    let minority = minority_label(counts);
    Ok((minority, counts[minority.index()], counts[minority.other().index()]))
}

/// Dispatches on `plan.method`.
pub fn resample(data: &FeatureMatrix, plan: &ResamplePlan) -> Result<Resampled> {
    plan.validate()?;
    match plan.method {
        ResampleMethod::RandomOver => random_oversample(data, plan.seed),
        ResampleMethod::Smote => smote(data, plan),
        ResampleMethod::Adasyn => adasyn(data, plan),
        ResampleMethod::RandomUnder => random_undersample(data, plan.seed),
        ResampleMethod::NearMiss => nearmiss(data, plan),
    }
}
