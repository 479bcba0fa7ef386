use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FeatureMatrix;
use crate::{Error, Result};

/// Unsupervised baseline: Lloyd's k-means on training features, scoring a
/// point by its negated distance to the nearest centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutlier {
    pub centroids: Vec<Vec<f64>>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(centroid, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

impl KMeansOutlier {
    /// Farthest-point initialization (first centroid drawn from `seed`),
    /// then at most `iters` Lloyd steps, stopping early once assignments
    /// settle. An emptied cluster keeps its previous centroid.
    pub fn fit(train: &FeatureMatrix, k: usize, iters: usize, seed: u64) -> Result<Self> {
        let n = train.rows();
        if k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if n < k {
            return Err(Error::InvalidArgument(format!("{n} training rows for k = {k}")));
        }
        if train.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("k-means input"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = rng.random_range(0..n);
        let mut centroids = vec![train.row(first).to_vec()];
        let mut closest: Vec<f64> = train
            .iter_rows()
            .map(|r| squared_distance(r, &centroids[0]))
            .collect();
        while centroids.len() < k {
            let mut far = 0;
            for (i, &d) in closest.iter().enumerate() {
                if d > closest[far] {
                    far = i;
                }
            }
            let next = train.row(far).to_vec();
            for (c, r) in closest.iter_mut().zip(train.iter_rows()) {
                *c = c.min(squared_distance(r, &next));
            }
            centroids.push(next);
        }

        let dim = train.cols();
        let mut assignment = vec![usize::MAX; n];
        for _ in 0..iters {
            let mut changed = false;
            for (a, row) in assignment.iter_mut().zip(train.iter_rows()) {
                let (c, _) = nearest(&centroids, row);
                if *a != c {
                    *a = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![vec![0.0f64; dim]; k];
            let mut counts = vec![0usize; k];
            for (&a, row) in assignment.iter().zip(train.iter_rows()) {
                counts[a] += 1;
                for (s, v) in sums[a].iter_mut().zip(row) {
                    *s += v;
                }
            }
            for ((centroid, sum), count) in centroids.iter_mut().zip(sums).zip(counts) {
                if count > 0 {
                    *centroid = sum.into_iter().map(|s| s / count as f64).collect();
                }
            }
        }
        Ok(KMeansOutlier { centroids })
    }

    /// Higher is more confident; 0 means the point sits on a centroid.
    pub fn score(&self, test: &FeatureMatrix) -> Result<Vec<f64>> {
        if test.rows() == 0 {
            return Err(Error::InvalidArgument("empty test set".into()));
        }
        let dim = self.centroids[0].len();
        if test.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: test.cols(),
            });
        }
        Ok(test
            .iter_rows()
            .map(|row| -nearest(&self.centroids, row).1.sqrt())
            .collect())
    }
}

pub fn kmeans_outlier_score(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    KMeansOutlier::fit(train, k, iters, seed)?.score(test)
}
