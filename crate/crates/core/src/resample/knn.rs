//! Exact brute-force Euclidean neighbor search over sparse rows.
//!
//! Candidate distances come from `|q|² + |r|² - 2 q·r` with the dot products
//! accumulated through a column index of the reference set. Everything close
//! to the selection boundary is then recomputed exactly by merging the two
//! rows, so ordering and reported distances do not suffer from cancellation.

use serde::Serialize;

use crate::par;
use crate::sparse::SparseMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    /// Row of the reference set.
    pub id: usize,
    pub distance: f64,
}

/// Per-query neighbor lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborIndex {
    pub neighbors: Vec<Vec<Neighbor>>,
}

impl NeighborIndex {
    pub fn of(&self, query: usize) -> &[Neighbor] {
        &self.neighbors[query]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    Nearest,
    Farthest,
}

struct RefIndex<'a> {
    refs: &'a SparseMatrix,
    columns: Vec<Vec<(u32, f64)>>,
    norms: Vec<f64>,
    max_norm: f64,
}

impl<'a> RefIndex<'a> {
    fn new(refs: &'a SparseMatrix) -> Self {
        let norms = refs.row_norms_squared();
        let max_norm = norms.iter().copied().fold(0.0, f64::max);
        RefIndex {
            refs,
            columns: refs.to_columns(),
            norms,
            max_norm,
        }
    }

    fn approx_sq_distances(&self, q: crate::sparse::SparseRow<'_>) -> Vec<f64> {
        let mut dots = vec![0.0; self.norms.len()];
        for (c, v) in q.iter() {
            if let Some(col) = self.columns.get(c) {
                for &(r, rv) in col {
                    dots[r as usize] += v * rv;
                }
            }
        }
        let qn = q.squared_norm();
        dots.iter()
            .zip(&self.norms)
            .map(|(d, rn)| (qn + rn - 2.0 * d).max(0.0))
            .collect()
    }
}

/// Ranks refs for one query and returns the first `k` under `order`,
/// ties broken by lower reference id.
fn rank_one(
    index: &RefIndex<'_>,
    queries: &SparseMatrix,
    qi: usize,
    k: usize,
    exclude: Option<usize>,
    order: Order,
) -> Vec<Neighbor> {
    let q = queries.row(qi);
    let approx = index.approx_sq_distances(q);
    let mut cand: Vec<(f64, usize)> = approx
        .iter()
        .enumerate()
        .filter(|(r, _)| Some(*r) != exclude)
        .map(|(r, &d)| (d, r))
        .collect();
    let key = |a: &(f64, usize), b: &(f64, usize)| match order {
        Order::Nearest => a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)),
        Order::Farthest => b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)),
    };
    cand.select_nth_unstable_by(k - 1, key);
    let boundary = cand[k - 1].0;
    let tol = 1e-9 * (q.squared_norm() + index.max_norm) + 1e-12;
    let mut close: Vec<(f64, usize)> = cand
        .into_iter()
        .filter(|&(d, _)| match order {
            Order::Nearest => d <= boundary + tol,
            Order::Farthest => d >= boundary - tol,
        })
        .map(|(_, r)| (q.squared_distance(&index.refs.row(r)), r))
        .collect();
    close.sort_unstable_by(key);
    close.truncate(k);
    close
        .into_iter()
        .map(|(d, id)| Neighbor {
            id,
            distance: d.sqrt(),
        })
        .collect()
}

/// `exclude[q]`, when given, names a reference row that query `q` may not
/// return (itself, when both sets share rows).
pub(crate) fn ranked(
    queries: &SparseMatrix,
    refs: &SparseMatrix,
    k: usize,
    exclude: Option<&[usize]>,
    order: Order,
) -> Result<NeighborIndex> {
    let available = refs.n_rows() - usize::from(exclude.is_some() && refs.n_rows() > 0);
    if k == 0 || k > available {
        return Err(Error::KTooLarge { k, available });
    }
    if queries.n_cols() != refs.n_cols() {
        return Err(Error::WidthMismatch {
            expected: refs.n_cols(),
            got: queries.n_cols(),
        });
    }
    let index = RefIndex::new(refs);
    let neighbors = par::map_range(queries.n_rows(), |qi| {
        rank_one(&index, queries, qi, k, exclude.map(|e| e[qi]), order)
    });
    Ok(NeighborIndex { neighbors })
}

/// The `k` nearest refs of every query.
pub fn knn(queries: &SparseMatrix, refs: &SparseMatrix, k: usize) -> Result<NeighborIndex> {
    ranked(queries, refs, k, None, Order::Nearest)
}

/// The `k` nearest other points of every point in the set.
pub fn knn_self(points: &SparseMatrix, k: usize) -> Result<NeighborIndex> {
    let ids: Vec<usize> = (0..points.n_rows()).collect();
    ranked(points, points, k, Some(&ids), Order::Nearest)
}
