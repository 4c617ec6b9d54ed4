//! Multinomial (softmax) logistic regression with class weights and L2.
//!
//! Minimizes
//! `(1/N) Σ_i w(y_i) · -log softmax(W x_i + b)[y_i] + (λ/2)‖W‖²`
//! with L-BFGS. The objective is strictly convex for λ > 0, so the optimum
//! does not depend on the solver; L-BFGS is simply the fastest deterministic
//! first-order method available here.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{check_width, labels_from_proba, require_both_classes, softmax2, ClassWeights, Predictor};
use crate::label::Label;
use crate::par;
use crate::sparse::{FeatureMatrix, SparseMatrix};
use crate::Result;

/// Rows per gradient chunk. Fixed so the reduction order never depends on
/// the thread count.
const CHUNK_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegConfig {
    /// L2 strength; `None` means 1/N.
    pub lambda: Option<f64>,
    pub max_epochs: usize,
    /// Convergence when the largest parameter change of an iteration falls below this.
    pub tol: f64,
    pub memory: usize,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            lambda: None,
            max_epochs: 1000,
            tol: 1e-4,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    /// `[authentic, fake]` weight vectors.
    pub weights: [Vec<f64>; 2],
    pub bias: [f64; 2],
    pub converged: bool,
    pub epochs: usize,
}

/// Flat parameter layout: `W_0 (d) | W_1 (d) | b_0 | b_1`.
pub fn n_params(n_features: usize) -> usize {
    2 * n_features + 2
}

fn logits(params: &[f64], d: usize, row: crate::sparse::SparseRow<'_>) -> (f64, f64) {
    let (mut z0, mut z1) = (params[2 * d], params[2 * d + 1]);
    for (c, v) in row.iter() {
        z0 += params[c] * v;
        z1 += params[d + c] * v;
    }
    (z0, z1)
}

/// Objective value and gradient at `params`.
pub fn objective_and_gradient(
    params: &[f64],
    data: &FeatureMatrix,
    sample_weights: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let d = data.n_cols();
    let n = data.n_rows();
    let n_chunks = n.div_ceil(CHUNK_ROWS);
    let partials = par::map_range(n_chunks, |ci| {
        let mut grad = vec![0.0; n_params(d)];
        let mut loss = 0.0;
        for i in ci * CHUNK_ROWS..((ci + 1) * CHUNK_ROWS).min(n) {
            let row = data.x.row(i);
            let (z0, z1) = logits(params, d, row);
            let m = z0.max(z1);
            let lse = m + ((z0 - m).exp() + (z1 - m).exp()).ln();
            let y = data.labels[i].index();
            let w = sample_weights[i];
            loss += w * (lse - if y == 0 { z0 } else { z1 });
            let p = softmax2(z0, z1);
            let g0 = w * (p[0] - f64::from(u8::from(y == 0)));
            let g1 = w * (p[1] - f64::from(u8::from(y == 1)));
            for (c, v) in row.iter() {
                grad[c] += g0 * v;
                grad[d + c] += g1 * v;
            }
            grad[2 * d] += g0;
            grad[2 * d + 1] += g1;
        }
        (loss, grad)
    });
    let inv_n = if n > 0 { 1.0 / n as f64 } else { 0.0 };
    let mut loss = 0.0;
    let mut grad = vec![0.0; n_params(d)];
    for (l, g) in partials {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    loss *= inv_n;
    for g in grad.iter_mut() {
        *g *= inv_n;
    }
    let mut reg = 0.0;
    for j in 0..2 * d {
        reg += params[j] * params[j];
        grad[j] += lambda * params[j];
    }
    (loss + 0.5 * lambda * reg, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn train(data: &FeatureMatrix, weights: Option<&ClassWeights>, cfg: &LogRegConfig) -> Result<LogisticRegression> {
    require_both_classes(&data.labels)?;
    let d = data.n_cols();
    let lambda = cfg.lambda.unwrap_or(1.0 / data.n_rows() as f64);
    let sw = ClassWeights::per_sample(weights, &data.labels);
    let eval = |p: &[f64]| objective_and_gradient(p, data, &sw, lambda);

    let mut x = vec![0.0; n_params(d)];
    let (mut f, mut g) = eval(&x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        } else {
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if gmax > 1.0 { 1.0 / gmax } else { 1.0 };
            for qi in q.iter_mut() {
                *qi *= scale;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        if slope == 0.0 {
            converged = true;
            break;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let (ft, gt) = eval(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // no decrease possible at floating-point resolution
            converged = true;
            break;
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let max_update = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        f = f_new;
        g = g_new;
        // a backtracked step can be tiny far from the optimum
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_update < cfg.tol && (step == 1.0 || gmax < cfg.tol) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("logistic regression stopped at the {}-epoch cap", cfg.max_epochs);
    }
    Ok(LogisticRegression {
        weights: [x[..d].to_vec(), x[d..2 * d].to_vec()],
        bias: [x[2 * d], x[2 * d + 1]],
        converged,
        epochs,
    })
}

impl LogisticRegression {
    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Vec<[f64; 2]>> {
        check_width(self.n_features(), x)?;
        Ok(x.rows()
            .map(|row| {
                let (mut z0, mut z1) = (self.bias[0], self.bias[1]);
                for (c, v) in row.iter() {
                    z0 += self.weights[0][c] * v;
                    z1 += self.weights[1][c] * v;
                }
                softmax2(z0, z1)
            })
            .collect())
    }
}

impl Predictor for LogisticRegression {
    fn n_features(&self) -> usize {
        self.weights[0].len()
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| p[1]).collect())
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        Ok(labels_from_proba(&self.predict_proba(x)?))
    }
}
