use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

const PROB_FLOOR: f64 = 1e-15;

pub(crate) fn sigmoid(margin: f64) -> f64 {
    1.0 / (1.0 + (-margin).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Unshrunk log-odds increment.
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Longest root-to-leaf path, counted in splits.
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, depth)) = stack.pop() {
            match self.nodes[at] {
                Node::Leaf { .. } => deepest = deepest.max(depth),
                Node::Split { left, right, .. } => {
                    stack.push((left, depth + 1));
                    stack.push((right, depth + 1));
                }
            }
        }
        deepest
    }
}

/// Trained tree ensemble `g`: features to probability of a correct answer.
///
/// Serialized as JSON with the schema
/// `{version, n_features, base_score, learning_rate, feature_subset, trees: [{nodes}]}`.
/// Floats use the shortest decimal that round-trips, so a reloaded model
/// predicts bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub version: u32,
    pub n_features: usize,
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_subset: Option<Vec<usize>>,
    pub trees: Vec<Tree>,
}

impl ConfidenceModel {
    /// Raw log-odds: `base_score + learning_rate * sum(leaf values)`.
    pub fn margin(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: features.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.leaf_value(features)).sum();
        Ok(self.base_score + self.learning_rate * sum)
    }

    /// Probability strictly inside `(0, 1)`.
    pub fn predict(&self, features: &[f64]) -> Result<f64> {
        let p = sigmoid(self.margin(features)?);
        Ok(p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR))
    }

    pub fn predict_batch<'a>(&self, rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Vec<f64>> {
        rows.into_iter().map(|r| self.predict(r)).collect()
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::depth).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string(self).expect("model serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ConfidenceModel =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn write_to<W: Write>(&self, mut sink: W) -> Result<()> {
        sink.write_all(self.to_json().as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut source: R) -> Result<Self> {
        let mut text = String::new();
        source.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    /// Structural checks on a loaded model: supported version, finite
    /// parameters, feature indices in range, and child links that only point
    /// forward so every traversal terminates.
    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {}", self.version)));
        }
        if !self.base_score.is_finite() || !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Model("non-finite base score or learning rate".into()));
        }
        if let Some(subset) = &self.feature_subset {
            if subset.iter().any(|&f| f >= self.n_features) {
                return Err(Error::Model("feature subset index out of range".into()));
            }
        }
        for (t, tree) in self.trees.iter().enumerate() {
            if tree.nodes.is_empty() {
                return Err(Error::Model(format!("tree {t} has no nodes")));
            }
            for (i, node) in tree.nodes.iter().enumerate() {
                match *node {
                    Node::Leaf { value } if !value.is_finite() => {
                        return Err(Error::Model(format!("tree {t} node {i}: non-finite leaf")));
                    }
                    Node::Leaf { .. } => {}
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        if feature >= self.n_features {
                            return Err(Error::Model(format!(
                                "tree {t} node {i}: feature {feature} >= n_features {}",
                                self.n_features
                            )));
                        }
                        if threshold.is_nan() {
                            return Err(Error::Model(format!("tree {t} node {i}: NaN threshold")));
                        }
                        let n = tree.nodes.len();
                        if left <= i || right <= i || left >= n || right >= n {
                            return Err(Error::Model(format!("tree {t} node {i}: bad child link")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
