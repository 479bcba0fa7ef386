//! Shape-coherence family: a normalized histogram of pairwise state distances.

use super::kernel::{distance_fn, for_each_pair};
use crate::trajectory::StateMatrix;
use crate::{Error, Result};

pub const SHAPE_BINS: usize = 16;

/// Histogram of all `T(T-1)/2` pairwise distances, scaled by the largest
/// distance into `bins` equal-width bins over `[0, 1]` (last bin closed) and
/// normalized by the pair count. Identical states give `(1, 0, ..., 0)`.
pub fn shape_coherence(h: StateMatrix<'_>, bins: usize) -> Result<Vec<f64>> {
    h.check()?;
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    let rows = h.rows();
    let mut distances = Vec::with_capacity(rows * (rows - 1) / 2);
    for_each_pair(h.as_slice(), h.dim(), distance_fn(), |_, _, d| distances.push(d));
    Ok(distance_histogram(&distances, bins))
}

pub(crate) fn distance_histogram(distances: &[f64], bins: usize) -> Vec<f64> {

    let mut hist = vec![0.0f64; bins];
    let max = distances.iter().copied().fold(0.0f64, f64::max);
    if max == 0.0 {
        hist[0] = 1.0;
        return hist;
    }
    let mut counts = vec![0usize; bins];
    for d in distances {
        let bin = ((d / max) * bins as f64) as usize;
        counts[bin.min(bins - 1)] += 1;
    }
    let pairs = distances.len() as f64;
    for (h, c) in hist.iter_mut().zip(counts) {
        *h = c as f64 / pairs;
    }
    hist
}
