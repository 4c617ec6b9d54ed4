//! The six classifiers, balanced class weights, and a common prediction
//! interface.
//!
//! Every fitted model yields hard labels and a real-valued positive-class
//! score: a probability for LR / MNB / BNB, the decision value for the SVM,
//! and the positive leaf or vote fraction for the trees.

pub mod forest;
pub mod logreg;
pub mod nb;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassifierKind, ExperimentConfig};
use crate::label::{class_counts, Label};
use crate::sparse::{FeatureMatrix, SparseMatrix};
use crate::{Error, Result};

pub use forest::{ForestConfig, RandomForest};
pub use logreg::{LogRegConfig, LogisticRegression};
pub use nb::{BernoulliNb, MultinomialNb};
pub use svm::{SvmConfig, SvmModel};
pub use tree::{DecisionTree, MaxFeatures, TreeConfig};

/// Per-class loss weights, indexed by [`Label::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights(pub [f64; 2]);

impl ClassWeights {
    pub const UNIT: ClassWeights = ClassWeights([1.0, 1.0]);

    pub fn get(&self, label: Label) -> f64 {
        self.0[label.index()]
    }

    pub(crate) fn per_sample(weights: Option<&ClassWeights>, labels: &[Label]) -> Vec<f64> {
        match weights {
            Some(w) => labels.iter().map(|&l| w.get(l)).collect(),
            None => vec![1.0; labels.len()],
        }
    }
}

/// `w_c = N / (K * n_c)` over the classes present; absent classes get 1.
pub fn balanced_class_weights(y: &[Label]) -> ClassWeights {
    let counts = class_counts(y);
    let present = counts.iter().filter(|&&c| c > 0).count().max(1);
    let n = y.len() as f64;
    let mut w = [1.0; 2];
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            w[i] = n / (present as f64 * c as f64);
        }
    }
    ClassWeights(w)
}

pub(crate) fn check_width(expected: usize, x: &SparseMatrix) -> Result<()> {
    if x.n_cols() != expected {
        return Err(Error::WidthMismatch {
            expected,
            got: x.n_cols(),
        });
    }
    Ok(())
}

pub(crate) fn require_both_classes(labels: &[Label]) -> Result<()> {
    if class_counts(labels).contains(&0) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// A fitted model.
pub trait Predictor: Send + Sync {
    fn n_features(&self) -> usize;

    /// Positive-class (fake) score per row.
    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>>;

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>>;

    /// Positive-class score mapped into `[0, 1]`, used as a stacking feature.
    fn meta_score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.score(x)
    }
}

/// Something that can be fitted to labeled rows.
pub trait Learner: Sync {
    fn fit(&self, data: &FeatureMatrix, weights: Option<&ClassWeights>, seed: u64) -> Result<Box<dyn Predictor>>;
}

/// Hyperparameters of one of the six classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClassifierSpec {
    Lr(LogRegConfig),
    Svm(SvmConfig),
    Mnb { alpha: f64 },
    Bnb { alpha: f64 },
    Rfc(ForestConfig),
    Dtc(TreeConfig),
}

impl ClassifierSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::Lr(_) => ClassifierKind::Lr,
            ClassifierSpec::Svm(_) => ClassifierKind::Svm,
            ClassifierSpec::Mnb { .. } => ClassifierKind::Mnb,
            ClassifierSpec::Bnb { .. } => ClassifierKind::Bnb,
            ClassifierSpec::Rfc(_) => ClassifierKind::Rfc,
            ClassifierSpec::Dtc(_) => ClassifierKind::Dtc,
        }
    }

    /// Defaults for `kind`, with hyperparameters taken from `cfg`.
    pub fn from_config(kind: ClassifierKind, cfg: &ExperimentConfig) -> Self {
        match kind {
            ClassifierKind::Lr => ClassifierSpec::Lr(LogRegConfig {
                lambda: cfg.lr_lambda,
                max_epochs: cfg.lr_max_epochs,
                ..LogRegConfig::default()
            }),
            ClassifierKind::Svm => ClassifierSpec::Svm(SvmConfig {
                gamma: cfg.svm_gamma,
                c: cfg.svm_c,
                row_cap: cfg.svm_row_cap,
                ..SvmConfig::default()
            }),
            ClassifierKind::Mnb => ClassifierSpec::Mnb { alpha: cfg.nb_alpha },
            ClassifierKind::Bnb => ClassifierSpec::Bnb { alpha: cfg.nb_alpha },
            ClassifierKind::Rfc => ClassifierSpec::Rfc(ForestConfig {
                n_estimators: cfg.rf_estimators,
                ..ForestConfig::default()
            }),
            ClassifierKind::Dtc => ClassifierSpec::Dtc(TreeConfig {
                max_depth: Some(cfg.dt_max_depth),
                ..TreeConfig::default()
            }),
        }
    }

    pub fn uses_class_weights(&self) -> bool {
        !matches!(self, ClassifierSpec::Mnb { .. } | ClassifierSpec::Bnb { .. })
    }

    pub fn train(&self, data: &FeatureMatrix, weights: Option<&ClassWeights>, seed: u64) -> Result<TrainedModel> {
        if weights.is_some() && !self.uses_class_weights() {
            log::warn!("{} ignores class weights", self.kind().upper());
        }
        Ok(match self {
            ClassifierSpec::Lr(c) => TrainedModel::Lr(logreg::train(data, weights, c)?),
            ClassifierSpec::Svm(c) => TrainedModel::Svm(svm::train(data, weights, c, seed)?),
            ClassifierSpec::Mnb { alpha } => TrainedModel::Mnb(nb::train_multinomial(data, *alpha)?),
            ClassifierSpec::Bnb { alpha } => TrainedModel::Bnb(nb::train_bernoulli(data, *alpha)?),
            ClassifierSpec::Rfc(c) => TrainedModel::Rfc(forest::train(data, weights, c, seed)?),
            ClassifierSpec::Dtc(c) => TrainedModel::Dtc(tree::train(data, weights, c)?),
        })
    }
}

impl Learner for ClassifierSpec {
    fn fit(&self, data: &FeatureMatrix, weights: Option<&ClassWeights>, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(self.train(data, weights, seed)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Lr(LogisticRegression),
    Svm(SvmModel),
    Mnb(MultinomialNb),
    Bnb(BernoulliNb),
    Rfc(RandomForest),
    Dtc(DecisionTree),
}

/// Version tag written into model dumps.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDump {
    format_version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Lr(_) => ClassifierKind::Lr,
            TrainedModel::Svm(_) => ClassifierKind::Svm,
            TrainedModel::Mnb(_) => ClassifierKind::Mnb,
            TrainedModel::Bnb(_) => ClassifierKind::Bnb,
            TrainedModel::Rfc(_) => ClassifierKind::Rfc,
            TrainedModel::Dtc(_) => ClassifierKind::Dtc,
        }
    }

    fn inner(&self) -> &dyn Predictor {
        match self {
            TrainedModel::Lr(m) => m,
            TrainedModel::Svm(m) => m,
            TrainedModel::Mnb(m) => m,
            TrainedModel::Bnb(m) => m,
            TrainedModel::Rfc(m) => m,
            TrainedModel::Dtc(m) => m,
        }
    }

    /// Class probabilities `[P(authentic), P(fake)]` for the probabilistic models.
    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Option<Vec<[f64; 2]>>> {
        Ok(match self {
            TrainedModel::Lr(m) => Some(m.predict_proba(x)?),
            TrainedModel::Mnb(m) => Some(m.predict_proba(x)?),
            TrainedModel::Bnb(m) => Some(m.predict_proba(x)?),
            _ => None,
        })
    }

    /// Training warnings worth surfacing in reports.
    pub fn warnings(&self) -> Vec<String> {
        match self {
            TrainedModel::Lr(m) if !m.converged => {
                vec![format!("logistic regression did not converge in {} epochs", m.epochs)]
            }
            TrainedModel::Svm(m) if !m.converged => vec!["SMO hit its iteration cap".into()],
            TrainedModel::Svm(m) if m.subsampled_from.is_some() => vec![format!(
                "SVM trained on a {}-row subsample of {} rows",
                m.n_train,
                m.subsampled_from.unwrap_or(0)
            )],
            _ => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&ModelDump {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })
        .map_err(|e| Error::Config(format!("model serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: ModelDump =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("model deserialization failed: {e}")))?;
        if dump.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                dump.format_version
            )));
        }
        Ok(dump.model)
    }
}

impl Predictor for TrainedModel {
    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.inner().score(x)
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        self.inner().predict(x)
    }

    fn meta_score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.inner().meta_score(x)
    }
}

/// Shared by the probability models: class with the larger probability, ties to authentic.
pub(crate) fn labels_from_proba(p: &[[f64; 2]]) -> Vec<Label> {
    p.iter()
        .map(|r| if r[1] > r[0] { Label::Fake } else { Label::Authentic })
        .collect()
}

/// Two-class softmax of joint log-likelihoods.
pub(crate) fn softmax2(a: f64, b: f64) -> [f64; 2] {
    let m = a.max(b);
    let (ea, eb) = ((a - m).exp(), (b - m).exp());
    let s = ea + eb;
    [ea / s, eb / s]
}
