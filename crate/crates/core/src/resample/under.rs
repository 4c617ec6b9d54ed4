use std::collections::BTreeSet;

use super::knn::{ranked, Order};
use super::{class_split, Resampled, ResamplePlan, RowOrigin};
use crate::sparse::FeatureMatrix;
use crate::{seed, Error, Result};

fn keep_rows(data: &FeatureMatrix, keep: &[usize], warnings: Vec<String>) -> Resampled {
    Resampled {
        data: data.select(keep),
        origin: keep.iter().map(|&i| RowOrigin::Original(i)).collect(),
        warnings,
    }
}

/// Keeps a uniform sample (without replacement) of majority rows equal in
/// size to the minority class. Row order is preserved.
pub fn random_undersample(data: &FeatureMatrix, seed_value: u64) -> Result<Resampled> {
    let (minority, n_min, n_maj) = class_split(data)?;
    if n_min == n_maj {
        return Ok(Resampled::unchanged(data));
    }
    let majority = data.rows_of(minority.other());
    let mut rng = seed::rng(seed_value);
    let chosen: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n_maj, n_min)
        .into_iter()
        .map(|p| majority[p])
        .collect();
    let keep: Vec<usize> = (0..data.n_rows())
        .filter(|&i| data.labels[i] == minority || chosen.contains(&i))
        .collect();
    Ok(keep_rows(data, &keep, Vec::new()))
}

fn mean_distances(lists: &[Vec<super::Neighbor>]) -> Vec<f64> {
    lists
        .iter()
        .map(|l| l.iter().map(|n| n.distance).sum::<f64>() / l.len() as f64)
        .collect()
}

/// Indices of `scores` ordered ascending (or descending) with ties by index.
fn order_by(scores: &[f64], descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        let c = scores[a].total_cmp(&scores[b]);
        (if descending { c.reverse() } else { c }).then(a.cmp(&b))
    });
    idx
}

/// NearMiss undersampling. No randomness; distance ties go to the lower row id.
///
/// * version 1 keeps the majority rows with the smallest mean distance to
///   their `k` nearest minority rows;
/// * version 2 uses the mean distance to the `k` farthest minority rows;
/// * version 3 first shortlists the `nearmiss_ver3_neighbors` nearest
///   majority rows of every minority row, then keeps the shortlisted rows
///   with the largest mean distance to their `k` nearest minority rows. When
///   the shortlist is smaller than the minority class it is topped up in
///   version-1 order so class counts still match.
pub fn nearmiss(data: &FeatureMatrix, plan: &ResamplePlan) -> Result<Resampled> {
    let (minority, n_min, n_maj) = class_split(data)?;
    if n_min == n_maj {
        return Ok(Resampled::unchanged(data));
    }
    let k = plan.k_neighbors;
    if k > n_min {
        return Err(Error::KTooLarge { k, available: n_min });
    }
    let min_rows = data.rows_of(minority);
    let maj_rows = data.rows_of(minority.other());
    let min_x = data.x.select(&min_rows);
    let maj_x = data.x.select(&maj_rows);
    let mut warnings = Vec::new();

    let chosen: Vec<usize> = match plan.nearmiss_version {
        1 => {
            let near = ranked(&maj_x, &min_x, k, None, Order::Nearest)?;
            order_by(&mean_distances(&near.neighbors), false)[..n_min].to_vec()
        }
        2 => {
            let far = ranked(&maj_x, &min_x, k, None, Order::Farthest)?;
            order_by(&mean_distances(&far.neighbors), false)[..n_min].to_vec()
        }
        3 => {
            let m = plan.nearmiss_ver3_neighbors.clamp(1, n_maj);
            let short = ranked(&min_x, &maj_x, m, None, Order::Nearest)?;
            let shortlist: BTreeSet<usize> = short.neighbors.iter().flatten().map(|n| n.id).collect();
            let near = ranked(&maj_x, &min_x, k, None, Order::Nearest)?;
            let score = mean_distances(&near.neighbors);
            let mut picked: Vec<usize> = order_by(&score, true)
                .into_iter()
                .filter(|i| shortlist.contains(i))
                .take(n_min)
                .collect();
            if picked.len() < n_min {
                let msg = format!(
                    "NearMiss-3 shortlist has {} rows for {} minority rows; topping up by nearest mean distance",
                    picked.len(),
                    n_min
                );
                log::warn!("{msg}");
                warnings.push(msg);
                let extra: Vec<usize> = order_by(&score, false)
                    .into_iter()
                    .filter(|i| !shortlist.contains(i))
                    .take(n_min - picked.len())
                    .collect();
                picked.extend(extra);
            }
            picked
        }
        v => return Err(Error::Config(format!("unknown NearMiss version {v}"))),
    };
    let keep_maj: BTreeSet<usize> = chosen.into_iter().map(|p| maj_rows[p]).collect();
    let keep: Vec<usize> = (0..data.n_rows())
        .filter(|&i| data.labels[i] == minority || keep_maj.contains(&i))
        .collect();
    Ok(keep_rows(data, &keep, warnings))
}
