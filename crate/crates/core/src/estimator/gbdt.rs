//! Exact-greedy gradient boosting with a binary logistic objective.
//!
//! Trees grow leaf-wise: the open leaf with the largest split gain is split
//! next, up to `max_leaves`, with no depth limit. Split search visits
//! features in ascending index order and thresholds in ascending value order
//! and only replaces the incumbent on a strictly larger gain, so ties go to
//! the lowest feature and then the lowest threshold. Training is therefore
//! fully deterministic; `seed` is recorded but never consumed.

use super::model::{sigmoid, ConfidenceModel, Node, Tree, MODEL_VERSION};
use super::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    pub l2_leaf: f64,
    pub seed: u64,
    /// Restrict split search to these feature indices (ablations).
    pub feature_subset: Option<Vec<usize>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 200,
            learning_rate: 0.05,
            max_leaves: 31,
            min_samples_leaf: 20,
            l2_leaf: 1.0,
            seed: 42,
            feature_subset: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.max_leaves < 2 {
            return Err(Error::InvalidArgument("max_leaves must be at least 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidArgument("min_samples_leaf must be at least 1".into()));
        }
        if !(self.l2_leaf >= 0.0 && self.l2_leaf.is_finite()) {
            return Err(Error::InvalidArgument("l2_leaf must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Mean logistic loss of raw margins against labels.
pub fn log_loss(margins: &[f64], labels: &[bool]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| {
            // log(1 + e^m) - y*m, evaluated without overflow
            let softplus = m.max(0.0) + (-m.abs()).exp().ln_1p();
            softplus - if y { m } else { 0.0 }
        })
        .sum();
    total / margins.len() as f64
}

pub fn train(features: &FeatureMatrix, labels: &[bool], cfg: &TrainConfig) -> Result<ConfidenceModel> {
    train_traced(features, labels, cfg).map(|(model, _)| model)
}

/// Trains and also returns the training log-loss before the first tree and
/// after every boosting round (`n_trees + 1` values).
pub fn train_traced(
    features: &FeatureMatrix,
    labels: &[bool],
    cfg: &TrainConfig,
) -> Result<(ConfidenceModel, Vec<f64>)> {
    cfg.validate()?;
    let n = features.rows();
    let n_features = features.cols();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("{n} training rows, at least 2 required")));
    }
    if n_features == 0 {
        return Err(Error::InvalidArgument("no feature columns".into()));
    }
    if features.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::SingleClass);
    }

    let active: Vec<usize> = match &cfg.feature_subset {
        Some(subset) => {
            let mut s = subset.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidArgument("empty feature subset".into()));
            }
            if let Some(&bad) = s.iter().find(|&&f| f >= n_features) {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    actual: bad + 1,
                });
            }
            s
        }
        None => (0..n_features).collect(),
    };

    let prior = n_pos as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();

    // Rows sorted by value once per active feature; nodes partition these lists.
    let presorted: Vec<Vec<u32>> = active
        .iter()
        .map(|&f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                features
                    .get(a as usize, f)
                    .total_cmp(&features.get(b as usize, f))
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut leaf_sums = vec![0.0f64; n];
    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0f64; n];
    let mut hess = vec![0.0f64; n];
    let mut history = Vec::with_capacity(cfg.n_trees + 1);
    history.push(log_loss(&margins, labels));

    let builder = TreeBuilder {
        features,
        active: &active,
        cfg,
    };
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for _ in 0..cfg.n_trees {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = p - if labels[i] { 1.0 } else { 0.0 };
            hess[i] = p * (1.0 - p);
        }
        let (tree, assignments) = builder.build(&presorted, &grad, &hess);
        for (leaf_value, rows) in assignments {
            for r in rows {
                let r = r as usize;
                leaf_sums[r] += leaf_value;
                margins[r] = base_score + cfg.learning_rate * leaf_sums[r];
            }
        }
        trees.push(tree);
        history.push(log_loss(&margins, labels));
    }

    let model = ConfidenceModel {
        version: MODEL_VERSION,
        n_features,
        base_score,
        learning_rate: cfg.learning_rate,
        feature_subset: cfg.feature_subset.as_ref().map(|_| active.clone()),
        trees,
    };
    Ok((model, history))
}

#[derive(Debug, Clone, Copy)]
struct Split {
    gain: f64,
    feature: usize,
    // position within the active-feature list
    slot: usize,
    threshold: f64,
    left_count: usize,
}

struct OpenLeaf {
    node: usize,
    sorted: Vec<Vec<u32>>,
    grad_sum: f64,
    hess_sum: f64,
    best: Option<Split>,
}

struct TreeBuilder<'a> {
    features: &'a FeatureMatrix,
    active: &'a [usize],
    cfg: &'a TrainConfig,
}

impl TreeBuilder<'_> {
    /// Grows one tree; returns it with each leaf's value and member rows.
    fn build(&self, presorted: &[Vec<u32>], grad: &[f64], hess: &[f64]) -> (Tree, Vec<(f64, Vec<u32>)>) {
        let (grad_sum, hess_sum) = presorted[0]
            .iter()
            .fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]));
        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        let mut open = vec![self.open_leaf(0, presorted.to_vec(), grad_sum, hess_sum, grad, hess)];
        let mut leaves = 1;

        while leaves < self.cfg.max_leaves {
            let pick = open
                .iter()
                .enumerate()
                .filter_map(|(i, leaf)| leaf.best.map(|s| (i, s.gain)))
                .fold(None, |best: Option<(usize, f64)>, (i, gain)| match best {
                    Some((_, g)) if g >= gain => best,
                    _ => Some((i, gain)),
                });
            let Some((index, _)) = pick else { break };
            let leaf = open.remove(index);
            let split = leaf.best.expect("picked leaf has a split");

            let mut goes_left = vec![false; self.features.rows()];
            for &r in &leaf.sorted[split.slot][..split.left_count] {
                goes_left[r as usize] = true;
            }
            let (mut left_sorted, mut right_sorted) = (Vec::new(), Vec::new());
            for list in &leaf.sorted {
                let (l, r): (Vec<u32>, Vec<u32>) = list.iter().partition(|&&row| goes_left[row as usize]);
                left_sorted.push(l);
                right_sorted.push(r);
            }
            let (lg, lh) = left_sorted[0]
                .iter()
                .fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]));

            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[leaf.node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            open.push(self.open_leaf(left, left_sorted, lg, lh, grad, hess));
            open.push(self.open_leaf(
                right,
                right_sorted,
                leaf.grad_sum - lg,
                leaf.hess_sum - lh,
                grad,
                hess,
            ));
            leaves += 1;
        }
        let mut assignments = Vec::with_capacity(open.len());
        for mut leaf in open {
            let value = -leaf.grad_sum / (leaf.hess_sum + self.cfg.l2_leaf);
            nodes[leaf.node] = Node::Leaf { value };
            assignments.push((value, std::mem::take(&mut leaf.sorted[0])));
        }
        (Tree { nodes }, assignments)
    }

    fn open_leaf(
        &self,
        node: usize,
        sorted: Vec<Vec<u32>>,
        grad_sum: f64,
        hess_sum: f64,
        grad: &[f64],
        hess: &[f64],
    ) -> OpenLeaf {
        let best = self.best_split(&sorted, grad_sum, hess_sum, grad, hess);
        OpenLeaf {
            node,
            sorted,
            grad_sum,
            hess_sum,
            best,
        }
    }

    fn best_split(
        &self,
        sorted: &[Vec<u32>],
        grad_sum: f64,
        hess_sum: f64,
        grad: &[f64],
        hess: &[f64],
    ) -> Option<Split> {
        let count = sorted[0].len();
        let min_leaf = self.cfg.min_samples_leaf;
        if count < 2 * min_leaf {
            return None;
        }
        let lambda = self.cfg.l2_leaf;
        let parent = grad_sum * grad_sum / (hess_sum + lambda);

        let mut best: Option<Split> = None;
        for (slot, (&feature, rows)) in self.active.iter().zip(sorted).enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for i in 0..count - min_leaf {
                let r = rows[i] as usize;
                gl += grad[r];
                hl += hess[r];
                let left_count = i + 1;
                if left_count < min_leaf {
                    continue;
                }
                let here = self.features.get(r, feature);
                let next = self.features.get(rows[i + 1] as usize, feature);
                if here == next {
                    continue;
                }
                let gr = grad_sum - gl;
                let hr = hess_sum - hl;
                let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                if gain > best.map_or(0.0, |s| s.gain) {
                    let mid = here + (next - here) / 2.0;
                    let threshold = if mid < next { mid } else { here };
                    best = Some(Split {
                        gain,
                        feature,
                        slot,
                        threshold,
                        left_count,
                    });
                }
            }
        }
        best
    }
}
