//! RBF-kernel support vector machine trained with SMO.
//!
//! The solver follows the classic dual formulation
//! `min ½ αᵀQα − eᵀα` s.t. `0 ≤ α_i ≤ C_i`, `yᵀα = 0`, `Q_ij = y_i y_j K(x_i, x_j)`,
//! with second-order working-set selection and no shrinking. Fake is `+1`.

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::{check_width, require_both_classes, ClassWeights, Predictor};
use crate::label::Label;
use crate::par;
use crate::seed::{self, streams};
use crate::sparse::{FeatureMatrix, SparseMatrix, SparseRow};
use crate::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub gamma: f64,
    pub c: f64,
    /// Training sets above this size are refused (or subsampled, see below).
    pub row_cap: usize,
    /// KKT violation tolerance.
    pub tol: f64,
    /// When set, oversized training sets are reduced to `row_cap` rows by a
    /// seeded uniform sample instead of failing.
    pub subsample_to_cap: bool,
    /// `None` means `max(10_000_000, 100 n)`.
    pub max_iter: Option<usize>,
    pub cache_mb: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            gamma: 1.0,
            c: 1.0,
            row_cap: 20_000,
            tol: 1e-3,
            subsample_to_cap: false,
            max_iter: None,
            cache_mb: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub support_vectors: SparseMatrix,
    /// `α_i y_i` per support vector.
    pub dual_coef: Vec<f64>,
    /// Training-row index of each support vector.
    pub support: Vec<usize>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
    pub n_train: usize,
    /// Original row count when the training set was subsampled.
    pub subsampled_from: Option<usize>,
}

pub fn rbf(gamma: f64, a: SparseRow<'_>, b: SparseRow<'_>) -> f64 {
    (-gamma * a.squared_distance(&b).max(0.0)).exp()
}

struct KernelRows<'a> {
    x: &'a SparseMatrix,
    norms: Vec<f64>,
    gamma: f64,
    scratch: Vec<f64>,
    cache: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a SparseMatrix, gamma: f64, cache_mb: usize) -> Self {
        let n = x.n_rows().max(1);
        KernelRows {
            x,
            norms: x.row_norms_squared(),
            gamma,
            scratch: vec![0.0; x.n_cols()],
            cache: HashMap::new(),
            order: VecDeque::new(),
            capacity: (cache_mb * (1 << 20) / (8 * n)).max(2),
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = self.cache.get(&i) {
            return Rc::clone(r);
        }
        let xi = self.x.row(i);
        for (c, v) in xi.iter() {
            self.scratch[c] = v;
        }
        let (x, norms, gamma, dense) = (self.x, &self.norms, self.gamma, &self.scratch);
        let ni = norms[i];
        let row = par::map_range(x.n_rows(), |t| {
            if t == i {
                return 1.0;
            }
            let dot: f64 = x.row(t).iter().map(|(c, v)| dense[c] * v).sum();
            (-gamma * (ni + norms[t] - 2.0 * dot).max(0.0)).exp()
        });
        for (c, _) in xi.iter() {
            self.scratch[c] = 0.0;
        }
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.cache.remove(&old);
            }
        }
        let row = Rc::new(row);
        self.cache.insert(i, Rc::clone(&row));
        self.order.push_back(i);
        row
    }
}

/// Dual solution on the full training set.
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves the dual for labels `y ∈ {−1, +1}` and per-row bounds `c`.
pub fn solve_dual(x: &SparseMatrix, y: &[f64], c: &[f64], gamma: f64, tol: f64, max_iter: usize, cache_mb: usize) -> DualSolution {
    let n = x.n_rows();
    let mut kernel = KernelRows::new(x, gamma, cache_mb);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: &[f64], t: usize| a[t] >= c[t];
    let lower = |a: &[f64], t: usize| a[t] <= 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(&alpha, t) } else { !lower(&alpha, t) };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        if i == usize::MAX {
            converged = true;
            break;
        }
        let ki = kernel.row(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(&alpha, t) } else { !upper(&alpha, t) };
            if !in_low {
                continue;
            }
            let yg = y[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let diff = gmax + yg;
            if diff > 0.0 {
                // K_ii = K_tt = 1
                let quad = 2.0 - 2.0 * ki[t];
                let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best_obj {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < tol || j == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;
        let kj = kernel.row(j);
        let (ci, cj) = (c[i], c[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let quad = (2.0 + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (yi, yj) = (y[i], y[j]);
        for t in 0..n {
            grad[t] += y[t] * (yi * ki[t] * di + yj * kj[t] * dj);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(&alpha, t) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(&alpha, t) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    DualSolution {
        alpha,
        rho,
        converged,
        iterations,
    }
}

pub fn train(data: &FeatureMatrix, weights: Option<&ClassWeights>, cfg: &SvmConfig, seed_value: u64) -> Result<SvmModel> {
    if !(cfg.gamma > 0.0 && cfg.c > 0.0) {
        return Err(Error::Config(format!("SVM needs gamma > 0 and C > 0 (got {}, {})", cfg.gamma, cfg.c)));
    }
    let n = data.n_rows();
    let mut subsampled_from = None;
    let sub;
    let data = if n > cfg.row_cap {
        if !cfg.subsample_to_cap {
            return Err(Error::RowCap { rows: n, cap: cfg.row_cap });
        }
        let mut rng = seed::rng(seed::derive(seed_value, streams::SVM_SUBSAMPLE, 0));
        let mut keep = rand::seq::index::sample(&mut rng, n, cfg.row_cap).into_vec();
        keep.sort_unstable();
        log::warn!("SVM training on a {}-row subsample of {n} rows", cfg.row_cap);
        subsampled_from = Some(n);
        sub = data.select(&keep);
        &sub
    } else {
        data
    };
    require_both_classes(&data.labels)?;
    let y: Vec<f64> = data.labels.iter().map(|&l| if l == Label::Fake { 1.0 } else { -1.0 }).collect();
    let c: Vec<f64> = ClassWeights::per_sample(weights, &data.labels)
        .into_iter()
        .map(|w| w * cfg.c)
        .collect();
    let max_iter = cfg.max_iter.unwrap_or_else(|| (100 * data.n_rows()).max(10_000_000));
    let sol = solve_dual(&data.x, &y, &c, cfg.gamma, cfg.tol, max_iter, cfg.cache_mb);
    if !sol.converged {
        log::warn!("SMO stopped after {} iterations without meeting the tolerance", sol.iterations);
    }
    let support: Vec<usize> = (0..data.n_rows()).filter(|&t| sol.alpha[t] > 0.0).collect();
    Ok(SvmModel {
        gamma: cfg.gamma,
        support_vectors: data.x.select(&support),
        dual_coef: support.iter().map(|&t| sol.alpha[t] * y[t]).collect(),
        support,
        rho: sol.rho,
        converged: sol.converged,
        iterations: sol.iterations,
        n_train: data.n_rows(),
        subsampled_from,
    })
}

impl SvmModel {
    /// `Σ α_i y_i K(x_i, x) − ρ` per row.
    pub fn decision_function(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        check_width(self.n_features(), x)?;
        Ok(par::map_range(x.n_rows(), |q| {
            let row = x.row(q);
            let s: f64 = self
                .support_vectors
                .rows()
                .zip(&self.dual_coef)
                .map(|(sv, &a)| a * rbf(self.gamma, sv, row))
                .sum();
            s - self.rho
        }))
    }
}

impl Predictor for SvmModel {
    fn n_features(&self) -> usize {
        self.support_vectors.n_cols()
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.decision_function(x)
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|f| if f > 0.0 { Label::Fake } else { Label::Authentic })
            .collect())
    }

    /// Logistic squash of the decision value.
    fn meta_score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        Ok(self.decision_function(x)?.into_iter().map(|f| 1.0 / (1.0 + (-f).exp())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Label::{Authentic as A, Fake as F};

    fn fm(rows: &[Vec<f64>], labels: &[Label]) -> FeatureMatrix {
        FeatureMatrix::new(SparseMatrix::from_dense(rows).unwrap(), labels.to_vec()).unwrap()
    }

    fn xor() -> FeatureMatrix {
        fm(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            &[A, A, F, F],
        )
    }

    #[test]
    fn solves_xor() {
        let d = xor();
        let cfg = SvmConfig { c: 10.0, ..SvmConfig::default() };
        let m = train(&d, None, &cfg, 0).unwrap();
        assert!(m.converged);
        assert_eq!(m.predict(&d.x).unwrap(), d.labels);
    }

    #[test]
    fn label_swap_negates_decision() {
        let d = fm(
            &[vec![0.0, 0.2], vec![1.0, 1.0], vec![0.3, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]],
            &[A, A, F, F, A],
        );
        let swapped = FeatureMatrix::new(d.x.clone(), d.labels.iter().map(|l| l.other()).collect()).unwrap();
        let cfg = SvmConfig::default();
        let a = train(&d, None, &cfg, 0).unwrap().decision_function(&d.x).unwrap();
        let b = train(&swapped, None, &cfg, 0).unwrap().decision_function(&d.x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u + v).abs() < 1e-6, "{u} vs {v}");
        }
    }

    #[test]
    fn row_cap() {
        let d = xor();
        let cfg = SvmConfig { row_cap: 3, ..SvmConfig::default() };
        assert!(matches!(train(&d, None, &cfg, 0), Err(Error::RowCap { rows: 4, cap: 3 })));
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 20.0]).collect();
        let labels: Vec<Label> = (0..20).map(|i| if i < 10 { A } else { F }).collect();
        let big = fm(&rows, &labels);
        let cfg = SvmConfig { row_cap: 10, subsample_to_cap: true, ..SvmConfig::default() };
        let m = train(&big, None, &cfg, 5).unwrap();
        assert_eq!(m.n_train, 10);
        assert_eq!(m.subsampled_from, Some(20));
        assert_eq!(train(&big, None, &cfg, 5).unwrap(), m);
    }

    #[test]
    fn tiny_cache_matches_large_cache() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 9) as f64 / 3.0, (i % 4) as f64]).collect();
        let labels: Vec<Label> = (0..40).map(|i| if (i % 9) + (i % 4) > 5 { F } else { A }).collect();
        let d = fm(&rows, &labels);
        let big = train(&d, None, &SvmConfig::default(), 0).unwrap();
        let small = train(&d, None, &SvmConfig { cache_mb: 0, ..SvmConfig::default() }, 0).unwrap();
        assert_eq!(big, small);
    }
}
