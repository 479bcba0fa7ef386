//! Spectral-stability family: low-frequency DFT power and the bottom of the
//! normalized graph-Laplacian spectrum.

use nalgebra::DMatrix;

use super::kernel::{dot_fn, for_each_pair, multiversion};
use crate::trajectory::StateMatrix;
use crate::{Error, Result};

pub const DFT_PAD: usize = 256;
pub const DFT_FREQUENCIES: usize = 16;
pub const LAPLACIAN_EIGENVALUES: usize = 16;

/// Marks eigenvalue slots that a short trajectory cannot fill.
pub const EIGEN_SENTINEL: f64 = 2.0;

const DEGREE_FLOOR: f64 = 1e-12;
const BLOCK: usize = 64;

/// Mean and max (over hidden dimensions) DFT power at frequencies `1..=k`.
///
/// Each dimension's series is centered on its mean over the `T` real tokens
/// and zero-padded to `pad_to` before the transform, so the padding adds no
/// energy outside DC and a constant trajectory yields all zeros. Only the `k`
/// requested bins are evaluated, each as a direct sum over the `T` real
/// samples, which gives the same coefficients as a full transform of the
/// padded series. Output is `[mean_1, max_1, ..., mean_k, max_k]`.
pub fn fft_features(h: StateMatrix<'_>, pad_to: usize, k: usize) -> Result<Vec<f64>> {
    h.check()?;
    let rows = h.rows();
    let dim = h.dim();
    if rows > pad_to {
        return Err(Error::InvalidArgument(format!(
            "T = {rows} exceeds the DFT length {pad_to}"
        )));
    }
    if k == 0 || 2 * k >= pad_to {
        return Err(Error::InvalidArgument(format!(
            "{k} frequencies requested from a length-{pad_to} DFT"
        )));
    }

    let mut center = vec![0.0f64; dim];
    for t in 0..rows {
        for (c, &x) in center.iter_mut().zip(h.row(t)) {
            *c += x as f64;
        }
    }
    center.iter_mut().for_each(|c| *c /= rows as f64);

    // twiddles[t * k + f] for frequency f + 1; reducing (f + 1) * t mod
    // pad_to first keeps every angle exact.
    let twiddles: Vec<(f64, f64)> = (0..rows)
        .flat_map(|t| {
            (1..=k).map(move |freq| {
                let angle = std::f64::consts::TAU * ((freq * t) % pad_to) as f64 / pad_to as f64;
                let (s, c) = angle.sin_cos();
                (c, s)
            })
        })
        .collect();

    let (sum, max) = dft_power(h, &center, &twiddles, k);

    let mut out = Vec::with_capacity(2 * k);
    for (s, m) in sum.iter().zip(&max) {
        out.push(s / dim as f64);
        out.push(*m);
    }
    Ok(out)
}

multiversion! {
    /// Sum and max over dimensions of `|X_f|^2` for each of the `k` frequencies.
    /// Dimensions are processed in blocks so the running coefficients for all
    /// frequencies stay in cache; power is reduced per block as it finishes.
    fn dft_power(h: StateMatrix<'_>, center: &[f64], twiddles: &[(f64, f64)], k: usize) -> (Vec<f64>, Vec<f64>) {
        let (rows, dim) = (h.rows(), h.dim());
        let mut re = vec![0.0f64; k * BLOCK];
        let mut im = vec![0.0f64; k * BLOCK];
        // Four independent lanes per frequency for the power reductions.
        let mut sum = vec![[0.0f64; 4]; k];
        let mut max = vec![[0.0f64; 4]; k];
        let mut x = [0.0f64; BLOCK];
        for d0 in (0..dim).step_by(BLOCK) {
            let width = BLOCK.min(dim - d0);
            for t in 0..rows {
                let row = &h.row(t)[d0..d0 + width];
                for ((v, &raw), mu) in x.iter_mut().zip(row).zip(&center[d0..d0 + width]) {
                    *v = raw as f64 - mu;
                }
                if t == 0 {
                    // The t = 0 twiddle is (1, 0): same values as accumulating
                    // into zeroed buffers, without a clearing pass.
                    for f in 0..k {
                        re[f * BLOCK..f * BLOCK + width].copy_from_slice(&x[..width]);
                        im[f * BLOCK..f * BLOCK + width].fill(0.0);
                    }
                    continue;
                }
                for (f, &(c, s)) in twiddles[t * k..(t + 1) * k].iter().enumerate() {
                    let r = &mut re[f * BLOCK..f * BLOCK + width];
                    let i = &mut im[f * BLOCK..f * BLOCK + width];
                    for ((r, i), &v) in r.iter_mut().zip(i.iter_mut()).zip(&x[..width]) {
                        *r += c * v;
                        *i -= s * v;
                    }
                }
            }
            for f in 0..k {
                let r = &re[f * BLOCK..f * BLOCK + width];
                let i = &im[f * BLOCK..f * BLOCK + width];
                let (mut s, mut m) = (sum[f], max[f]);
                let mut cr = r.chunks_exact(4);
                let mut ci = i.chunks_exact(4);
                for (r, i) in (&mut cr).zip(&mut ci) {
                    for l in 0..4 {
                        let power = r[l] * r[l] + i[l] * i[l];
                        s[l] += power;
                        m[l] = if power > m[l] { power } else { m[l] };
                    }
                }
                for (r, i) in cr.remainder().iter().zip(ci.remainder()) {
                    let power = r * r + i * i;
                    s[0] += power;
                    m[0] = if power > m[0] { power } else { m[0] };
                }
                (sum[f], max[f]) = (s, m);
            }
        }
        let sum = sum.iter().map(|s| (s[0] + s[1]) + (s[2] + s[3])).collect();
        let max = max.iter().map(|m| m.iter().copied().fold(0.0, f64::max)).collect();
        (sum, max)
    }
}

/// Builds the symmetric normalized Laplacian `I - D^-1/2 W D^-1/2` of the
/// token similarity graph, `W_ij = max(0, cos(h_i, h_j))` off the diagonal.
///
/// A zero-norm state has no similarity to anything; its degree is floored so
/// the normalization stays finite.
pub fn normalized_laplacian(h: StateMatrix<'_>) -> Result<DMatrix<f64>> {
    h.check()?;
    let rows = h.rows();
    let dim = h.dim();

    let dot = dot_fn();
    let norms = row_norms(h);
    let mut w = DMatrix::<f64>::zeros(rows, rows);
    for_each_pair(h.as_slice(), dim, dot, |i, j, d| set_similarity(&mut w, &norms, i, j, d));
    Ok(laplacian_from_similarity(w))
}

pub(crate) fn row_norms(h: StateMatrix<'_>) -> Vec<f64> {
    let dot = dot_fn();
    (0..h.rows()).map(|t| dot(h.row(t), h.row(t)).sqrt()).collect()
}

/// Stores the clipped cosine of states `i` and `j` given their dot product.
#[inline]
pub(crate) fn set_similarity(w: &mut DMatrix<f64>, norms: &[f64], i: usize, j: usize, dot: f64) {
    if norms[i] > 0.0 && norms[j] > 0.0 {
        let sim = (dot / (norms[i] * norms[j])).max(0.0);
        w[(i, j)] = sim;
        w[(j, i)] = sim;
    }
}

pub(crate) fn laplacian_from_similarity(w: DMatrix<f64>) -> DMatrix<f64> {
    let rows = w.nrows();
    let inv_sqrt_degree: Vec<f64> = (0..rows)
        .map(|i| 1.0 / w.row(i).sum().max(DEGREE_FLOOR).sqrt())
        .collect();
    let mut lap = DMatrix::<f64>::identity(rows, rows);
    for i in 0..rows {
        for j in 0..rows {
            if i != j {
                lap[(i, j)] = -w[(i, j)] * inv_sqrt_degree[i] * inv_sqrt_degree[j];
            }
        }
    }
    lap
}

/// The `m` smallest eigenvalues of [`normalized_laplacian`], ascending,
/// clamped to `[0, 2]` and padded with [`EIGEN_SENTINEL`] when `T < m`.
pub fn laplacian_spectrum(h: StateMatrix<'_>, m: usize) -> Result<Vec<f64>> {
    smallest_eigenvalues(normalized_laplacian(h)?, m)
}

pub(crate) fn smallest_eigenvalues(lap: DMatrix<f64>, m: usize) -> Result<Vec<f64>> {
    let mut eigenvalues: Vec<f64> = lap.symmetric_eigenvalues().iter().copied().collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Computation("Laplacian eigensolve produced non-finite values".into()));
    }
    eigenvalues.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = eigenvalues
        .into_iter()
        .take(m)
        .map(|v| v.clamp(0.0, EIGEN_SENTINEL))
        .collect();
    out.resize(m, EIGEN_SENTINEL);
    Ok(out)
}
