//! Random forest of bootstrapped CART trees with per-node feature sampling.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, Grower, MaxFeatures, TreeConfig};
use super::{check_width, require_both_classes, ClassWeights, Predictor};
use crate::label::Label;
use crate::par;
use crate::seed::{self, streams};
use crate::sparse::{FeatureMatrix, SparseMatrix};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_estimators: 400,
            max_depth: None,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

/// Tree `t` draws its bootstrap sample and feature subsets from
/// `derive(seed, TREE, t)`, so trees can be grown in any order.
pub fn train(
    data: &FeatureMatrix,
    weights: Option<&ClassWeights>,
    cfg: &ForestConfig,
    seed_value: u64,
) -> Result<RandomForest> {
    require_both_classes(&data.labels)?;
    if cfg.n_estimators == 0 {
        return Err(crate::Error::Config("a forest needs at least one tree".into()));
    }
    let n = data.n_rows();
    let cw = ClassWeights::per_sample(weights, &data.labels);
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        max_features: cfg.max_features,
    };
    let trees = par::map_range(cfg.n_estimators, |t| {
        let mut rng = seed::rng(seed::derive(seed_value, streams::TREE, t as u64));
        let sample_weight: Vec<f64> = if cfg.bootstrap {
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.gen_range(0..n)] += 1;
            }
            counts.iter().zip(&cw).map(|(&c, &w)| c as f64 * w).collect()
        } else {
            cw.clone()
        };
        let rows: Vec<usize> = (0..n).filter(|&i| sample_weight[i] > 0.0).collect();
        Grower::new(&data.x, &data.labels, &sample_weight, &tree_cfg).grow(rows, &mut rng)
    });
    Ok(RandomForest {
        n_features: data.n_cols(),
        trees,
    })
}

impl RandomForest {
    /// Fraction of trees voting fake.
    pub fn vote_fraction(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        check_width(self.n_features, x)?;
        let n_trees = self.trees.len() as f64;
        Ok(par::map_range(x.n_rows(), |i| {
            let row = x.row(i);
            let fake = self.trees.iter().filter(|t| t.predict_row(row) == Label::Fake).count();
            fake as f64 / n_trees
        }))
    }
}

impl Predictor for RandomForest {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.vote_fraction(x)
    }

    /// Majority vote; an even split goes to authentic.
    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        Ok(self
            .vote_fraction(x)?
            .into_iter()
            .map(|f| if f > 0.5 { Label::Fake } else { Label::Authentic })
            .collect())
    }
}
