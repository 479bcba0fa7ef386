//! Reference implementations used as test oracles.
//!
//! Each one recomputes a quantity by the most direct route available and
//! shares no code with the library path it checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-major `rows x dim` matrix with entries uniform in `[-1, 1)`.
pub fn random_states(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Vec<f32> {
    (0..rows * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect()
}

pub fn row(data: &[f32], dim: usize, t: usize) -> Vec<f64> {
    data[t * dim..(t + 1) * dim].iter().map(|&x| x as f64).collect()
}

/// Full O(pad^2) DFT of every mean-centered, zero-padded column; returns
/// `[mean_k, max_k]` power over columns for k = 1..=k_max.
pub fn naive_dft_features(data: &[f32], dim: usize, pad: usize, k_max: usize) -> Vec<f64> {
    let rows = data.len() / dim;
    let mut power = vec![vec![0.0f64; dim]; pad];
    for d in 0..dim {
        let column: Vec<f64> = (0..rows).map(|t| data[t * dim + d] as f64).collect();
        let mean = column.iter().sum::<f64>() / rows as f64;
        let mut padded = vec![0.0f64; pad];
        for (p, c) in padded.iter_mut().zip(&column) {
            *p = c - mean;
        }
        for (k, slot) in power.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in padded.iter().enumerate() {
                let angle = -2.0 * std::f64::consts::PI * (k * t) as f64 / pad as f64;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            slot[d] = re * re + im * im;
        }
    }
    let mut out = Vec::new();
    for bins in power.iter().skip(1).take(k_max) {
        out.push(bins.iter().sum::<f64>() / dim as f64);
        out.push(bins.iter().copied().fold(f64::MIN, f64::max));
    }
    out
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Normalized Laplacian of the clipped-cosine token graph, built directly.
pub fn oracle_laplacian(data: &[f32], dim: usize) -> Vec<Vec<f64>> {
    let rows = data.len() / dim;
    let h: Vec<Vec<f64>> = (0..rows).map(|t| row(data, dim, t)).collect();
    let norm = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut w = vec![vec![0.0; rows]; rows];
    for i in 0..rows {
        for j in 0..rows {
            if i == j || norm(&h[i]) == 0.0 || norm(&h[j]) == 0.0 {
                continue;
            }
            let cos = h[i].iter().zip(&h[j]).map(|(a, b)| a * b).sum::<f64>() / (norm(&h[i]) * norm(&h[j]));
            w[i][j] = cos.max(0.0);
        }
    }
    let deg: Vec<f64> = w.iter().map(|r| r.iter().sum::<f64>().max(1e-12)).collect();
    let mut l = vec![vec![0.0; rows]; rows];
    for i in 0..rows {
        for j in 0..rows {
            l[i][j] = if i == j { 1.0 } else { 0.0 } - w[i][j] / (deg[i] * deg[j]).sqrt();
        }
    }
    l
}

/// Laplacian spectrum padded with 2.0, from the Jacobi oracle.
pub fn oracle_laplacian_spectrum(data: &[f32], dim: usize, m: usize) -> Vec<f64> {
    let mut ev = jacobi_eigenvalues(oracle_laplacian(data, dim));
    ev.truncate(m);
    ev.resize(m, 2.0);
    ev
}

/// Histogram by enumerating every pair and testing each bin's interval.
pub fn oracle_shape_histogram(data: &[f32], dim: usize, bins: usize) -> Vec<f64> {
    let rows = data.len() / dim;
    let mut dists = Vec::new();
    for i in 0..rows {
        for j in i + 1..rows {
            let a = &data[i * dim..(i + 1) * dim];
            let b = &data[j * dim..(j + 1) * dim];
            let sq: f64 = a.iter().zip(b).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
            dists.push(sq.sqrt());
        }
    }
    let max = dists.iter().copied().fold(0.0, f64::max);
    let mut hist = vec![0.0; bins];
    if max == 0.0 {
        hist[0] = 1.0;
        return hist;
    }
    for &d in &dists {
        let x = d / max;
        for (b, slot) in hist.iter_mut().enumerate() {
            let lo = b as f64 / bins as f64;
            let hi = (b + 1) as f64 / bins as f64;
            let inside = if b == bins - 1 { x >= lo && x <= 1.0 } else { x >= lo && x < hi };
            if inside {
                *slot += 1.0;
            }
        }
    }
    hist.iter().map(|c| c / dists.len() as f64).collect()
}

/// The six local-variation statistics, recomputed with two-pass formulas.
pub fn oracle_local_variation(data: &[f32], dim: usize) -> [f64; 6] {
    let rows = data.len() / dim;
    let h: Vec<Vec<f64>> = (0..rows).map(|t| row(data, dim, t)).collect();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let steps: Vec<f64> = h.windows(2).map(|w| dist(&w[1], &w[0])).collect();
    let n = steps.len() as f64;
    let total: f64 = steps.iter().sum();
    let mean = total / n;
    let var = steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let start_end = dist(&h[rows - 1], &h[0]);
    let mut per_dim_var = 0.0;
    let mut centroid = vec![0.0; dim];
    for d in 0..dim {
        let col: Vec<f64> = h.iter().map(|r| r[d]).collect();
        let m = col.iter().sum::<f64>() / rows as f64;
        centroid[d] = m;
        per_dim_var += col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / rows as f64;
    }
    let centroid_norm = centroid.iter().map(|c| c * c).sum::<f64>().sqrt();
    [total, mean, var, start_end, per_dim_var / dim as f64, centroid_norm]
}

/// AUROC by counting all positive-negative pairs.
pub fn pair_count_auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Sample covariance eigenvalues (population normalization), descending.
pub fn oracle_covariance_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let f = rows[0].len();
    let mean: Vec<f64> = (0..f).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; f]; f];
    for a in 0..f {
        for b in 0..f {
            cov[a][b] = rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / n;
        }
    }
    let mut ev = jacobi_eigenvalues(cov);
    ev.reverse();
    ev
}

/// `n` rows of 70 features; label is `x0 + x1 > 0` with a margin band of
/// half-width 0.1 removed, the other 68 columns are pure noise.
pub fn separable_synthetic(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while rows.len() < n {
        let r: Vec<f64> = (0..70).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = r[0] + r[1];
        if s.abs() < 0.1 {
            continue;
        }
        labels.push(s > 0.0);
        rows.push(r);
    }
    (rows, labels)
}

/// Fisher-Yates shuffle of labels with a fixed seed.
pub fn shuffled(labels: &[bool], seed: u64) -> Vec<bool> {
    let mut out = labels.to_vec();
    let mut rng = rng(seed);
    for i in (1..out.len()).rev() {
        let j = rng.random_range(0..=i);
        out.swap(i, j);
    }
    out
}
