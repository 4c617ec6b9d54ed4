//! Multinomial and Bernoulli naive Bayes with additive smoothing.

use serde::{Deserialize, Serialize};

use super::{check_width, labels_from_proba, require_both_classes, softmax2, Predictor};
use crate::label::{class_counts, Label};
use crate::sparse::{FeatureMatrix, SparseMatrix};
use crate::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("smoothing alpha must be positive, got {alpha}")));
    }
    Ok(())
}

fn log_priors(labels: &[Label]) -> [f64; 2] {
    let c = class_counts(labels);
    let n = labels.len() as f64;
    [(c[0] as f64 / n).ln(), (c[1] as f64 / n).ln()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    /// `log P(t | c)` per class.
    pub feature_log_prob: [Vec<f64>; 2],
}

/// Fits on feature counts (or any non-negative weights such as TF-IDF).
pub fn train_multinomial(data: &FeatureMatrix, alpha: f64) -> Result<MultinomialNb> {
    check_alpha(alpha)?;
    require_both_classes(&data.labels)?;
    let d = data.n_cols();
    let mut fc = [vec![0.0; d], vec![0.0; d]];
    for (i, row) in data.x.rows().enumerate() {
        let c = data.labels[i].index();
        for (j, v) in row.iter() {
            if v < 0.0 {
                return Err(Error::NegativeFeature { row: i, col: j, value: v });
            }
            fc[c][j] += v;
        }
    }
    let feature_log_prob = fc.map(|counts| {
        let denom = (counts.iter().sum::<f64>() + alpha * d as f64).ln();
        counts.iter().map(|&v| (v + alpha).ln() - denom).collect()
    });
    Ok(MultinomialNb {
        alpha,
        class_log_prior: log_priors(&data.labels),
        feature_log_prob,
    })
}

impl MultinomialNb {
    /// Joint log-likelihood `[authentic, fake]` per row.
    pub fn joint_log_likelihood(&self, x: &SparseMatrix) -> Result<Vec<[f64; 2]>> {
        check_width(self.n_features(), x)?;
        Ok(x.rows()
            .map(|row| {
                let mut jll = self.class_log_prior;
                for (j, v) in row.iter() {
                    jll[0] += v * self.feature_log_prob[0][j];
                    jll[1] += v * self.feature_log_prob[1][j];
                }
                jll
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self.joint_log_likelihood(x)?.into_iter().map(|j| softmax2(j[0], j[1])).collect())
    }
}

impl Predictor for MultinomialNb {
    fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| p[1]).collect())
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        Ok(labels_from_proba(&self.predict_proba(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNb {
    pub alpha: f64,
    pub class_log_prior: [f64; 2],
    /// `log p(t | c)` per class.
    pub log_p: [Vec<f64>; 2],
    /// `log (1 - p(t | c))` per class.
    pub log_not_p: [Vec<f64>; 2],
    /// `Σ_t log (1 - p(t | c))`, the score of an empty document.
    pub base: [f64; 2],
}

/// Fits on presence / absence; any value above zero counts as present.
pub fn train_bernoulli(data: &FeatureMatrix, alpha: f64) -> Result<BernoulliNb> {
    check_alpha(alpha)?;
    require_both_classes(&data.labels)?;
    let d = data.n_cols();
    let n_c = class_counts(&data.labels);
    let mut df = [vec![0usize; d], vec![0usize; d]];
    for (i, row) in data.x.rows().enumerate() {
        let c = data.labels[i].index();
        for (j, v) in row.iter() {
            if v > 0.0 {
                df[c][j] += 1;
            }
        }
    }
    let mut log_p = [Vec::with_capacity(d), Vec::with_capacity(d)];
    let mut log_not_p = [Vec::with_capacity(d), Vec::with_capacity(d)];
    let mut base = [0.0; 2];
    for c in 0..2 {
        let denom = n_c[c] as f64 + 2.0 * alpha;
        for &k in &df[c] {
            let p = (k as f64 + alpha) / denom;
            let lnp = (1.0 - p).ln();
            log_p[c].push(p.ln());
            log_not_p[c].push(lnp);
            base[c] += lnp;
        }
    }
    Ok(BernoulliNb {
        alpha,
        class_log_prior: log_priors(&data.labels),
        log_p,
        log_not_p,
        base,
    })
}

impl BernoulliNb {
    pub fn joint_log_likelihood(&self, x: &SparseMatrix) -> Result<Vec<[f64; 2]>> {
        check_width(self.n_features(), x)?;
        Ok(x.rows()
            .map(|row| {
                let mut jll = [self.class_log_prior[0] + self.base[0], self.class_log_prior[1] + self.base[1]];
                for (j, v) in row.iter() {
                    if v > 0.0 {
                        for (c, s) in jll.iter_mut().enumerate() {
                            *s += self.log_p[c][j] - self.log_not_p[c][j];
                        }
                    }
                }
                jll
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self.joint_log_likelihood(x)?.into_iter().map(|j| softmax2(j[0], j[1])).collect())
    }
}

impl Predictor for BernoulliNb {
    fn n_features(&self) -> usize {
        self.log_p[0].len()
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| p[1]).collect())
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        Ok(labels_from_proba(&self.predict_proba(x)?))
    }
}
