//! Two-level stacked generalization with out-of-fold level-0 features.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassWeights, ClassifierSpec, Learner, Predictor, TrainedModel};
use crate::corpus::{ClassifierKind, ExperimentConfig};
use crate::label::Label;
use crate::par;
use crate::seed::{self, streams};
use crate::sparse::{FeatureMatrix, SparseMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackSpec {
    pub base: Vec<ClassifierSpec>,
    pub meta: ClassifierSpec,
    pub n_folds: usize,
    pub seed: u64,
    /// Feed predicted labels (0/1) to the meta model instead of scores.
    pub hard_labels: bool,
}

impl StackSpec {
    pub fn new(base: Vec<ClassifierSpec>, meta: ClassifierSpec, n_folds: usize, seed: u64) -> Result<Self> {
        let spec = StackSpec {
            base,
            meta,
            n_folds,
            seed,
            hard_labels: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// All six classifiers at level 0 (minus the meta kind when
    /// `stack_exclude_meta` is set) and `stack_meta` at level 1. The SVM base
    /// subsamples to its row cap rather than failing on large inputs.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let base = ClassifierKind::REPORT_ORDER
            .iter()
            .filter(|&&k| !(cfg.stack_exclude_meta && k == cfg.stack_meta))
            .map(|&k| match ClassifierSpec::from_config(k, cfg) {
                ClassifierSpec::Svm(mut s) => {
                    s.subsample_to_cap = true;
                    ClassifierSpec::Svm(s)
                }
                other => other,
            })
            .collect();
        let mut spec = StackSpec::new(base, ClassifierSpec::from_config(cfg.stack_meta, cfg), cfg.stack_folds, cfg.seed)?;
        spec.hard_labels = cfg.stack_hard_labels;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.is_empty() {
            return Err(Error::Config("stacking needs at least one base model".into()));
        }
        if self.n_folds < 2 {
            return Err(Error::Config(format!("stacking needs at least 2 folds, got {}", self.n_folds)));
        }
        Ok(())
    }
}

/// Fold assignment of every row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folds {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl Folds {
    /// Each class is shuffled and dealt round-robin over the folds; the
    /// second class starts where the first stopped so fold sizes stay even.
    pub fn stratified(labels: &[Label], k: usize, seed_value: u64) -> Result<Folds> {
        if k < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {k}")));
        }
        let mut rng = seed::rng(seed::derive(seed_value, streams::FOLDS, 0));
        let mut assignment = vec![0; labels.len()];
        let mut offset = 0;
        for label in Label::ALL {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
            members.shuffle(&mut rng);
            for (pos, &i) in members.iter().enumerate() {
                assignment[i] = (offset + pos) % k;
            }
            offset = (offset + members.len()) % k;
        }
        let folds = Folds { k, assignment };
        folds.check(labels)?;
        Ok(folds)
    }

    /// Every fold's training portion must contain both classes.
    pub fn check(&self, labels: &[Label]) -> Result<()> {
        for fold in 0..self.k {
            for label in Label::ALL {
                let present = (0..labels.len()).any(|i| self.assignment[i] != fold && labels[i] == label);
                if !present {
                    return Err(Error::FoldMissingClass { fold, label });
                }
            }
        }
        Ok(())
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

fn model_seed(seed_value: u64, fold: usize, model: usize) -> u64 {
    seed::derive(seed_value, streams::STACK_BASE, ((fold as u64) << 16) | model as u64)
}

fn level0_column(model: &dyn Predictor, x: &SparseMatrix, hard_labels: bool) -> Result<Vec<f64>> {
    if hard_labels {
        Ok(model
            .predict(x)?
            .into_iter()
            .map(|l| if l == Label::Fake { 1.0 } else { 0.0 })
            .collect())
    } else {
        model.meta_score(x)
    }
}

fn assemble(columns: &[Vec<f64>], n_rows: usize) -> Result<SparseMatrix> {
    SparseMatrix::from_rows(
        columns.len(),
        (0..n_rows).map(|i| columns.iter().enumerate().map(move |(m, c)| (m, c[i]))),
    )
}

/// Out-of-fold level-0 matrix for fixed folds: entry `(i, m)` comes from
/// base model `m` trained on every fold except the one holding row `i`.
pub fn out_of_fold(
    bases: &[&dyn Learner],
    data: &FeatureMatrix,
    folds: &Folds,
    weights: Option<&ClassWeights>,
    seed_value: u64,
    hard_labels: bool,
) -> Result<SparseMatrix> {
    if folds.assignment.len() != data.n_rows() {
        return Err(Error::LengthMismatch {
            left: folds.assignment.len(),
            right: data.n_rows(),
        });
    }
    folds.check(&data.labels)?;
    let m = bases.len();
    let jobs = par::map_range(folds.k * m, |job| -> Result<(Vec<usize>, Vec<f64>)> {
        let (fold, model) = (job / m, job % m);
        let test = folds.test_rows(fold);
        if test.is_empty() {
            return Ok((test, Vec::new()));
        }
        let fitted = bases[model].fit(&data.select(&folds.train_rows(fold)), weights, model_seed(seed_value, fold, model))?;
        let scores = level0_column(fitted.as_ref(), &data.x.select(&test), hard_labels)?;
        Ok((test, scores))
    });
    let mut columns = vec![vec![0.0; data.n_rows()]; m];
    for (job, out) in jobs.into_iter().enumerate() {
        let (rows, scores) = out?;
        for (&i, s) in rows.iter().zip(scores) {
            columns[job % m][i] = s;
        }
    }
    assemble(&columns, data.n_rows())
}

/// Out-of-fold level-0 matrix (r × M) with stratified folds drawn from `spec.seed`.
pub fn meta_features(spec: &StackSpec, data: &FeatureMatrix, weights: Option<&ClassWeights>) -> Result<SparseMatrix> {
    spec.validate()?;
    let folds = Folds::stratified(&data.labels, spec.n_folds, spec.seed)?;
    let bases: Vec<&dyn Learner> = spec.base.iter().map(|b| b as &dyn Learner).collect();
    out_of_fold(&bases, data, &folds, weights, spec.seed, spec.hard_labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    /// Level-0 models refit on the full training data.
    pub base: Vec<TrainedModel>,
    pub meta: TrainedModel,
    pub hard_labels: bool,
}

pub fn train_stack(spec: &StackSpec, data: &FeatureMatrix, weights: Option<&ClassWeights>) -> Result<StackedModel> {
    let mut models = train_stack_multi(spec, std::slice::from_ref(&spec.meta), data, weights)?;
    Ok(models.remove(0))
}

/// One stacked model per entry of `metas`, all sharing the level-0 stage of
/// `spec` (its own `meta` is ignored).
pub fn train_stack_multi(
    spec: &StackSpec,
    metas: &[ClassifierSpec],
    data: &FeatureMatrix,
    weights: Option<&ClassWeights>,
) -> Result<Vec<StackedModel>> {
    let level1 = meta_features(spec, data, weights)?;
    let meta_data = FeatureMatrix::new(level1, data.labels.clone())?;
    let base = par::map_range(spec.base.len(), |m| {
        spec.base[m].train(data, weights, model_seed(spec.seed, spec.n_folds, m))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let meta_seed = seed::derive(spec.seed, streams::STACK_META, 0);
    let metas = par::map_slice(metas, |m| m.train(&meta_data, None, meta_seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(metas
        .into_iter()
        .map(|meta| StackedModel {
            base: base.clone(),
            meta,
            hard_labels: spec.hard_labels,
        })
        .collect())
}

impl StackedModel {
    /// Level-1 input for `x`: one column per base model.
    pub fn level0(&self, x: &SparseMatrix) -> Result<SparseMatrix> {
        let columns = self
            .base
            .iter()
            .map(|b| level0_column(b, x, self.hard_labels))
            .collect::<Result<Vec<_>>>()?;
        assemble(&columns, x.n_rows())
    }
}

impl Predictor for StackedModel {
    fn n_features(&self) -> usize {
        self.base.first().map_or(0, |b| b.n_features())
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.meta.score(&self.level0(x)?)
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        self.meta.predict(&self.level0(x)?)
    }
}

pub fn predict_stack(model: &StackedModel, x: &SparseMatrix) -> Result<Vec<Label>> {
    model.predict(x)
}
