//! Local-variation family: statistics of consecutive-state displacements.

use super::kernel::distance_fn;
use crate::trajectory::StateMatrix;
use crate::Result;

pub const LOCAL_FEATURES: usize = 6;

/// Six displacement statistics, in order:
/// total path length, mean step, step variance, start-to-end distance,
/// mean per-dimension variance across tokens, and centroid norm.
///
/// Variances are population variances.
pub fn local_variation(h: StateMatrix<'_>) -> Result<[f64; LOCAL_FEATURES]> {
    h.check()?;
    let rows = h.rows();
    let dim = h.dim();

    let distance = distance_fn();
    let steps: Vec<f64> = (1..rows).map(|t| distance(h.row(t), h.row(t - 1))).collect();
    let path_length: f64 = steps.iter().sum();
    let mean_step = path_length / steps.len() as f64;
    let step_variance = steps.iter().map(|s| (s - mean_step).powi(2)).sum::<f64>() / steps.len() as f64;
    let start_end = distance(h.row(rows - 1), h.row(0));

    let mut centroid = vec![0.0f64; dim];
    for t in 0..rows {
        for (c, &x) in centroid.iter_mut().zip(h.row(t)) {
            *c += x as f64;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= rows as f64);

    let mut spread = vec![0.0f64; dim];
    for t in 0..rows {
        for ((s, &x), c) in spread.iter_mut().zip(h.row(t)).zip(&centroid) {
            *s += (x as f64 - c).powi(2);
        }
    }
    let embedding_variance = spread.iter().map(|s| s / rows as f64).sum::<f64>() / dim as f64;
    let centroid_norm = centroid.iter().map(|c| c * c).sum::<f64>().sqrt();

    Ok([
        path_length,
        mean_step,
        step_variance,
        start_end,
        embedding_variance,
        centroid_norm,
    ])
}
