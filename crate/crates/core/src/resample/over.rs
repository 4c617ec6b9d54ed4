use rand::Rng as _;

use super::knn::{knn_self, ranked, Order};
use super::{class_split, Resampled, ResamplePlan, RowOrigin};
use crate::sparse::{FeatureMatrix, SparseMatrix, SparseRow};
use crate::{seed, Error, Result};

/// `a + lambda * (b - a)` over the union of both supports.
pub(crate) fn interpolate(a: SparseRow<'_>, b: SparseRow<'_>, lambda: f64) -> Vec<(u32, f64)> {
    let mut out = Vec::with_capacity(a.nnz().max(b.nnz()));
    let (mut i, mut j) = (0, 0);
    while i < a.nnz() || j < b.nnz() {
        let ca = a.indices.get(i).copied().unwrap_or(u32::MAX);
        let cb = b.indices.get(j).copied().unwrap_or(u32::MAX);
        let (col, va, vb) = if ca < cb {
            i += 1;
            (ca, a.values[i - 1], 0.0)
        } else if cb < ca {
            j += 1;
            (cb, 0.0, b.values[j - 1])
        } else {
            i += 1;
            j += 1;
            (ca, a.values[i - 1], b.values[j - 1])
        };
        let v = va + lambda * (vb - va);
        if v != 0.0 {
            out.push((col, v));
        }
    }
    out
}

fn with_originals(data: &FeatureMatrix) -> (SparseMatrix, Vec<crate::Label>, Vec<RowOrigin>) {
    (
        data.x.clone(),
        data.labels.clone(),
        (0..data.n_rows()).map(RowOrigin::Original).collect(),
    )
}

/// Duplicates minority rows, drawn with replacement, until the classes balance.
pub fn random_oversample(data: &FeatureMatrix, seed_value: u64) -> Result<Resampled> {
    let (minority, n_min, n_maj) = class_split(data)?;
    if n_min == n_maj {
        return Ok(Resampled::unchanged(data));
    }
    let pool = data.rows_of(minority);
    let mut rng = seed::rng(seed_value);
    let (mut x, mut labels, mut origin) = with_originals(data);
    for _ in 0..(n_maj - n_min) {
        let r = pool[rng.gen_range(0..pool.len())];
        x.push_row(data.x.row(r));
        labels.push(minority);
        origin.push(RowOrigin::Duplicate(r));
    }
    Ok(Resampled {
        data: FeatureMatrix { x, labels },
        origin,
        warnings: Vec::new(),
    })
}

/// Minority-internal neighbor lists, as input row ids, with `k` clamped to
/// `n_min - 1`.
fn minority_neighbors(
    data: &FeatureMatrix,
    pool: &[usize],
    k: usize,
    out: &mut Resampled,
) -> Result<Vec<Vec<usize>>> {
    let k_eff = k.min(pool.len() - 1);
    if k_eff < k {
        out.warn(format!(
            "k_neighbors = {k} exceeds minority count - 1 = {}; clamped",
            pool.len() - 1
        ));
    }
    let sub = data.x.select(pool);
    let nn = knn_self(&sub, k_eff)?;
    Ok(nn
        .neighbors
        .iter()
        .map(|list| list.iter().map(|n| pool[n.id]).collect())
        .collect())
}

fn push_synthetic(
    data: &FeatureMatrix,
    target: &mut (SparseMatrix, Vec<crate::Label>, Vec<RowOrigin>),
    base: usize,
    neighbor: usize,
    lambda: f64,
) {
    let row = interpolate(data.x.row(base), data.x.row(neighbor), lambda);
    target.0.push_sorted(&row);
    target.1.push(data.labels[base]);
    target.2.push(RowOrigin::Synthetic { base, neighbor, lambda });
}

/// SMOTE: synthetic minority rows on segments between a minority row and one
/// of its `k` nearest minority neighbors.
pub fn smote(data: &FeatureMatrix, plan: &ResamplePlan) -> Result<Resampled> {
    let (minority, n_min, n_maj) = class_split(data)?;
    if n_min == n_maj {
        return Ok(Resampled::unchanged(data));
    }
    if n_min < 2 {
        return Err(Error::TooFewMinority(n_min));
    }
    let pool = data.rows_of(minority);
    let mut out = Resampled::unchanged(data);
    let neighbors = minority_neighbors(data, &pool, plan.k_neighbors, &mut out)?;
    let mut rng = seed::rng(plan.seed);
    let mut target = with_originals(data);
    for _ in 0..(n_maj - n_min) {
        let p = rng.gen_range(0..pool.len());
        let nb = &neighbors[p];
        let neighbor = nb[rng.gen_range(0..nb.len())];
        let lambda: f64 = rng.gen();
        push_synthetic(data, &mut target, pool[p], neighbor, lambda);
    }
    out.data = FeatureMatrix {
        x: target.0,
        labels: target.1,
    };
    out.origin = target.2;
    Ok(out)
}

/// Splits `total` proportionally to `weights` (which sum to 1) with the
/// largest-remainder rule; ties go to the lower index.
pub(crate) fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// ADASYN: like SMOTE, but each minority row receives synthetic rows in
/// proportion to the share of majority rows among its `k` nearest neighbors
/// in the full data.
pub fn adasyn(data: &FeatureMatrix, plan: &ResamplePlan) -> Result<Resampled> {
    let (minority, n_min, n_maj) = class_split(data)?;
    let total = (plan.beta * (n_maj - n_min) as f64).round() as usize;
    if total == 0 {
        return Ok(Resampled::unchanged(data));
    }
    if n_min < 2 {
        return Err(Error::TooFewMinority(n_min));
    }
    let k = plan.k_neighbors;
    let pool = data.rows_of(minority);
    let mut out = Resampled::unchanged(data);

    let queries = data.x.select(&pool);
    let full = ranked(&queries, &data.x, k, Some(&pool), Order::Nearest)?;
    let difficulty: Vec<f64> = full
        .neighbors
        .iter()
        .map(|list| list.iter().filter(|n| data.labels[n.id] != minority).count() as f64 / k as f64)
        .collect();
    let sum: f64 = difficulty.iter().sum();
    let weights: Vec<f64> = if sum > 0.0 {
        difficulty.iter().map(|r| r / sum).collect()
    } else {
        out.warn("no minority row has majority neighbors; allocating synthetic rows uniformly".into());
        vec![1.0 / n_min as f64; n_min]
    };
    let alloc = largest_remainder(&weights, total);

    let neighbors = minority_neighbors(data, &pool, k, &mut out)?;
    let mut rng = seed::rng(plan.seed);
    let mut target = with_originals(data);
    for (p, &g) in alloc.iter().enumerate() {
        let nb = &neighbors[p];
        for _ in 0..g {
            let neighbor = nb[rng.gen_range(0..nb.len())];
            let lambda: f64 = rng.gen();
            push_synthetic(data, &mut target, pool[p], neighbor, lambda);
        }
    }
    out.data = FeatureMatrix {
        x: target.0,
        labels: target.1,
    };
    out.origin = target.2;
    Ok(out)
}
