//! CART decision tree on weighted Gini impurity.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_width, require_both_classes, ClassWeights, Predictor};
use crate::label::Label;
use crate::par;
use crate::seed::{self, Rng};
use crate::sparse::{FeatureMatrix, SparseMatrix, SparseRow};
use crate::Result;

/// Features examined per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    /// `ceil(sqrt(d))`.
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().ceil() as usize,
            MaxFeatures::Count(n) => n.min(d),
        }
        .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Root is depth 0; `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: Some(6),
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Distinct training rows per class.
        counts: [usize; 2],
        weights: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    /// `nodes[0]` is the root.
    pub nodes: Vec<Node>,
}

/// Weighted Gini impurity times node weight: `W - Σ w_c² / W`.
fn weighted_gini(w: [f64; 2]) -> f64 {
    let t = w[0] + w[1];
    if t <= 0.0 {
        0.0
    } else {
        t - (w[0] * w[0] + w[1] * w[1]) / t
    }
}

/// Split point between two adjacent distinct values.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Per-feature buffers reused across the nodes of one tree.
struct Scratch {
    count: Vec<u32>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    chosen: Vec<bool>,
    touched: Vec<u32>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Scratch {
            count: vec![0; d],
            lo: vec![0.0; d],
            hi: vec![0.0; d],
            chosen: vec![false; d],
            touched: Vec::new(),
        }
    }
}

struct Entry {
    feature: u32,
    value: f64,
    row: u32,
    class: u8,
    weight: f64,
}

/// Training view: rows, labels and per-row weights.
pub(crate) struct Grower<'a> {
    x: &'a SparseMatrix,
    labels: &'a [Label],
    weight: &'a [f64],
    max_depth: Option<usize>,
    max_features: MaxFeatures,
}

fn class_weights(labels: &[Label], weight: &[f64], rows: &[usize]) -> ([f64; 2], [usize; 2]) {
    let mut w = [0.0; 2];
    let mut c = [0; 2];
    for &i in rows {
        let k = labels[i].index();
        w[k] += weight[i];
        c[k] += 1;
    }
    (w, c)
}

impl<'a> Grower<'a> {
    pub(crate) fn new(x: &'a SparseMatrix, labels: &'a [Label], weight: &'a [f64], cfg: &TreeConfig) -> Self {
        Grower {
            x,
            labels,
            weight,
            max_depth: cfg.max_depth,
            max_features: cfg.max_features,
        }
    }

    /// Best split of `rows` over the sampled features, if any has positive gain.
    #[cfg(test)]
    pub(crate) fn best_split(&self, rows: &[usize], rng: &mut Rng) -> Option<SplitChoice> {
        self.best_split_with(rows, rng, &mut Scratch::new(self.x.n_cols()))
    }

    fn best_split_with(&self, rows: &[usize], rng: &mut Rng, sc: &mut Scratch) -> Option<SplitChoice> {
        let (total, _) = class_weights(self.labels, self.weight, rows);
        let node_w = total[0] + total[1];
        let parent = weighted_gini(total);

        // non-constant features, ascending
        for &i in rows {
            for (j, v) in self.x.row(i).iter() {
                if sc.count[j] == 0 {
                    sc.touched.push(j as u32);
                    sc.lo[j] = v;
                    sc.hi[j] = v;
                } else {
                    sc.lo[j] = sc.lo[j].min(v);
                    sc.hi[j] = sc.hi[j].max(v);
                }
                sc.count[j] += 1;
            }
        }
        sc.touched.sort_unstable();
        let mut features: Vec<usize> = Vec::new();
        for &j in &sc.touched {
            let j = j as usize;
            if (sc.count[j] as usize) < rows.len() || sc.lo[j] != sc.hi[j] {
                features.push(j);
            }
            sc.count[j] = 0;
        }
        sc.touched.clear();
        let m = self.max_features.resolve(self.x.n_cols());
        if features.len() > m {
            for i in 0..m {
                let j = rng.gen_range(i..features.len());
                features.swap(i, j);
            }
            features.truncate(m);
            features.sort_unstable();
        }

        for &f in &features {
            sc.chosen[f] = true;
        }
        let mut entries: Vec<Entry> = Vec::new();
        for &i in rows {
            let class = self.labels[i].index() as u8;
            for (j, v) in self.x.row(i).iter() {
                if sc.chosen[j] {
                    entries.push(Entry {
                        feature: j as u32,
                        value: v,
                        row: i as u32,
                        class,
                        weight: self.weight[i],
                    });
                }
            }
        }
        for &f in &features {
            sc.chosen[f] = false;
        }
        entries.sort_unstable_by(|a, b| {
            a.feature
                .cmp(&b.feature)
                .then(a.value.total_cmp(&b.value))
                .then(a.row.cmp(&b.row))
        });
        let mut candidates: Vec<(usize, usize, usize)> = Vec::with_capacity(features.len());
        let mut s = 0;
        while s < entries.len() {
            let f = entries[s].feature;
            let mut e = s;
            while e < entries.len() && entries[e].feature == f {
                e += 1;
            }
            candidates.push((f as usize, s, e));
            s = e;
        }

        let mut best: Option<SplitChoice> = None;
        for &(feature, s, e) in &candidates {
            let zero_rows = rows.len() - (e - s);
            let mut zero_w = [0.0; 2];
            if zero_rows > 0 {
                let mut nz = [0.0; 2];
                for en in &entries[s..e] {
                    nz[en.class as usize] += en.weight;
                }
                zero_w = [(total[0] - nz[0]).max(0.0), (total[1] - nz[1]).max(0.0)];
            }
            // (value, class weights) groups in ascending value order
            let mut groups: Vec<(f64, [f64; 2])> = Vec::new();
            let mut zero_done = zero_rows == 0;
            for en in &entries[s..e] {
                if !zero_done && en.value > 0.0 {
                    groups.push((0.0, zero_w));
                    zero_done = true;
                }
                match groups.last_mut() {
                    Some(g) if g.0 == en.value => g.1[en.class as usize] += en.weight,
                    _ => {
                        let mut w = [0.0; 2];
                        w[en.class as usize] = en.weight;
                        groups.push((en.value, w));
                    }
                }
            }
            if !zero_done {
                groups.push((0.0, zero_w));
            }
            let mut left = [0.0; 2];
            for k in 0..groups.len() - 1 {
                left[0] += groups[k].1[0];
                left[1] += groups[k].1[1];
                let right = [total[0] - left[0], total[1] - left[1]];
                let gain = parent - weighted_gini(left) - weighted_gini(right);
                if best.is_none_or(|b| gain > b.gain) {
                    best = Some(SplitChoice {
                        feature,
                        threshold: midpoint(groups[k].0, groups[k + 1].0),
                        gain,
                    });
                }
            }
        }
        best.filter(|b| b.gain > 1e-12 * node_w)
    }

    pub(crate) fn grow(&self, rows: Vec<usize>, rng: &mut Rng) -> DecisionTree {
        let mut nodes: Vec<Node> = vec![Node::Leaf {
            counts: [0; 2],
            weights: [0.0; 2],
        }];
        let mut stack = vec![(0usize, rows, 0usize)];
        let mut scratch = Scratch::new(self.x.n_cols());
        while let Some((id, rows, depth)) = stack.pop() {
            let (w, counts) = class_weights(self.labels, self.weight, &rows);
            let stop = rows.len() < 2 || w[0] <= 0.0 || w[1] <= 0.0 || self.max_depth.is_some_and(|d| depth >= d);
            let split = if stop { None } else { self.best_split_with(&rows, rng, &mut scratch) };
            let Some(sp) = split else {
                nodes[id] = Node::Leaf { counts, weights: w };
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .into_iter()
                .partition(|&i| self.x.row(i).get(sp.feature) <= sp.threshold);
            let (li, ri) = (nodes.len(), nodes.len() + 1);
            let placeholder = Node::Leaf {
                counts: [0; 2],
                weights: [0.0; 2],
            };
            nodes.push(placeholder.clone());
            nodes.push(placeholder);
            nodes[id] = Node::Split {
                feature: sp.feature,
                threshold: sp.threshold,
                left: li,
                right: ri,
            };
            stack.push((ri, r, depth + 1));
            stack.push((li, l, depth + 1));
        }
        DecisionTree {
            n_features: self.x.n_cols(),
            nodes,
        }
    }
}

/// Fits a tree with per-class weights. Feature sampling (when configured)
/// draws from a fixed stream, so the result is deterministic.
pub fn train(data: &FeatureMatrix, weights: Option<&ClassWeights>, cfg: &TreeConfig) -> Result<DecisionTree> {
    train_seeded(data, weights, cfg, 0)
}

pub fn train_seeded(
    data: &FeatureMatrix,
    weights: Option<&ClassWeights>,
    cfg: &TreeConfig,
    seed_value: u64,
) -> Result<DecisionTree> {
    require_both_classes(&data.labels)?;
    let sw = ClassWeights::per_sample(weights, &data.labels);
    let grower = Grower::new(&data.x, &data.labels, &sw, cfg);
    Ok(grower.grow((0..data.n_rows()).collect(), &mut seed::rng(seed_value)))
}

impl DecisionTree {
    fn leaf(&self, row: SparseRow<'_>) -> &Node {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row.get(*feature) <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    /// Weighted fake fraction of the leaf reached by `row`.
    pub fn leaf_score(&self, row: SparseRow<'_>) -> f64 {
        match self.leaf(row) {
            Node::Leaf { weights, .. } => {
                let t = weights[0] + weights[1];
                if t > 0.0 {
                    weights[1] / t
                } else {
                    0.0
                }
            }
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn predict_row(&self, row: SparseRow<'_>) -> Label {
        if self.leaf_score(row) > 0.5 {
            Label::Fake
        } else {
            Label::Authentic
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

impl Predictor for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn score(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        check_width(self.n_features, x)?;
        Ok(par::map_range(x.n_rows(), |i| self.leaf_score(x.row(i))))
    }

    fn predict(&self, x: &SparseMatrix) -> Result<Vec<Label>> {
        check_width(self.n_features, x)?;
        Ok(par::map_range(x.n_rows(), |i| self.predict_row(x.row(i))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Label::{Authentic as A, Fake as F};
    use proptest::prelude::*;

    fn fm(rows: &[Vec<f64>], labels: &[Label]) -> FeatureMatrix {
        FeatureMatrix::new(SparseMatrix::from_dense(rows).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn one_dimensional_split() {
        let d = fm(&[vec![1.0], vec![2.0]], &[A, F]);
        let t = train(&d, None, &TreeConfig::default()).unwrap();
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
            }
            n => panic!("expected split, got {n:?}"),
        }
        assert_eq!(t.predict(&d.x).unwrap(), vec![A, F]);
    }

    #[test]
    fn zero_values_take_part() {
        let d = fm(&[vec![0.0], vec![0.0], vec![3.0]], &[A, A, F]);
        let t = train(&d, None, &TreeConfig::default()).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { threshold, .. } if threshold == 1.5));
        assert_eq!(t.predict(&d.x).unwrap(), vec![A, A, F]);
    }

    #[test]
    fn depth_is_bounded() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<Label> = (0..64).map(|i| if i % 2 == 0 { A } else { F }).collect();
        let d = fm(&rows, &labels);
        for depth in [0, 1, 3, 6] {
            let cfg = TreeConfig {
                max_depth: Some(depth),
                ..TreeConfig::default()
            };
            assert!(train(&d, None, &cfg).unwrap().depth() <= depth);
        }
        let full = train(&d, None, &TreeConfig { max_depth: None, ..TreeConfig::default() }).unwrap();
        assert_eq!(full.predict(&d.x).unwrap(), labels);
    }

    #[test]
    fn pure_node_is_leaf() {
        let d = fm(&[vec![1.0], vec![2.0], vec![5.0]], &[A, A, F]);
        let t = train(&d, None, &TreeConfig::default()).unwrap();
        assert_eq!(t.n_leaves(), 2);
    }

    #[test]
    fn midpoint_of_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
        assert_eq!(midpoint(1.0, 3.0), 2.0);
    }

    #[test]
    fn class_weight_moves_leaf_decision() {
        // one leaf-forced tree: 3 authentic vs 1 fake
        let d = fm(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]], &[A, A, A, F]);
        let cfg = TreeConfig::default();
        let plain = train(&d, None, &cfg).unwrap();
        assert_eq!(plain.predict(&d.x).unwrap(), vec![A; 4]);
        let weighted = train(&d, Some(&ClassWeights([1.0, 4.0])), &cfg).unwrap();
        assert_eq!(weighted.predict(&d.x).unwrap(), vec![F; 4]);
    }

    fn brute_force(d: &FeatureMatrix) -> f64 {
        let w = vec![1.0; d.n_rows()];
        let dense = d.x.to_dense();
        let (tot, _) = class_weights(&d.labels, &w, &(0..d.n_rows()).collect::<Vec<_>>());
        let parent = weighted_gini(tot);
        let mut best = f64::NEG_INFINITY;
        for f in 0..d.n_cols() {
            let mut vals: Vec<f64> = dense.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for p in vals.windows(2) {
                let thr = midpoint(p[0], p[1]);
                let mut l = [0.0; 2];
                let mut r = [0.0; 2];
                for (i, row) in dense.iter().enumerate() {
                    let side = if row[f] <= thr { &mut l } else { &mut r };
                    side[d.labels[i].index()] += 1.0;
                }
                best = best.max(parent - weighted_gini(l) - weighted_gini(r));
            }
        }
        best
    }

    proptest! {
        #[test]
        fn root_split_matches_exhaustive_search(
            rows in prop::collection::vec(prop::collection::vec(0u8..4, 3), 4..20),
            flips in prop::collection::vec(any::<bool>(), 20),
        ) {
            let dense: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let mut labels: Vec<Label> = flips[..dense.len()].iter().map(|&b| if b { F } else { A }).collect();
            labels[0] = A;
            labels[1] = F;
            let d = fm(&dense, &labels);
            let w = vec![1.0; d.n_rows()];
            let g = Grower::new(&d.x, &d.labels, &w, &TreeConfig::default());
            let found = g.best_split(&(0..d.n_rows()).collect::<Vec<_>>(), &mut seed::rng(0));
            let expected = brute_force(&d);
            match found {
                Some(s) => prop_assert!((s.gain - expected).abs() < 1e-9),
                None => prop_assert!(expected <= 1e-12 * d.n_rows() as f64),
            }
        }
    }
}
