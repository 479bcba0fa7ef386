//! Inner loops shared by the descriptor families.
//!
//! Reductions use eight independent lanes with a fixed combination order, so
//! the result does not depend on how wide the vector unit is.

/// Defines a function whose body is compiled twice, once for the baseline
/// target and once with AVX2, and dispatches on runtime CPU support.
///
/// The AVX2 copy vectorizes four lanes wide instead of two. FMA is not
/// enabled, so every operation and its order is unchanged and both copies
/// return bit-identical results.
macro_rules! multiversion {
    ($(#[$meta:meta])* $vis:vis fn $name:ident($($arg:ident: $ty:ty),* $(,)?) -> $ret:ty $body:block) => {
        $(#[$meta])*
        $vis fn $name($($arg: $ty),*) -> $ret {
            #[inline(always)]
            fn body($($arg: $ty),*) -> $ret $body

            #[cfg(target_arch = "x86_64")]
            #[target_feature(enable = "avx2")]
            unsafe fn avx2($($arg: $ty),*) -> $ret {
                body($($arg),*)
            }

            #[cfg(target_arch = "x86_64")]
            {
                if std::arch::is_x86_feature_detected!("avx2") {
                    // SAFETY: AVX2 support was just checked at runtime.
                    return unsafe { avx2($($arg),*) };
                }
            }
            body($($arg),*)
        }
    };
}
pub(crate) use multiversion;

/// A reduction over two equal-length `f32` rows.
pub(crate) type RowKernel = fn(&[f32], &[f32]) -> f64;

/// Euclidean distance of two `f32` rows, accumulated in `f64`.
#[inline(always)]
fn distance(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            let d = x[k] as f64 - y[k] as f64;
            acc[k] += d * d;
        }
    }
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum();
    (lanes(acc) + tail).sqrt()
}

/// Dot product of two `f32` rows, accumulated in `f64`.
#[inline(always)]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += x[k] as f64 * y[k] as f64;
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(&x, &y)| x as f64 * y as f64).sum();
    lanes(acc) + tail
}

/// Dot product and Euclidean distance in one pass, each bit-identical to
/// [`dot`] and [`distance`].
#[inline(always)]
fn dot_distance(a: &[f32], b: &[f32]) -> (f64, f64) {
    let mut prod = [0.0f64; 8];
    let mut sq = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            let (x, y) = (x[k] as f64, y[k] as f64);
            prod[k] += x * y;
            sq[k] += (x - y) * (x - y);
        }
    }
    let (ta, tb) = (ca.remainder(), cb.remainder());
    let tail_prod: f64 = ta.iter().zip(tb).map(|(&x, &y)| x as f64 * y as f64).sum();
    let tail_sq: f64 = ta.iter().zip(tb).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
    (lanes(prod) + tail_prod, (lanes(sq) + tail_sq).sqrt())
}

#[inline(always)]
fn lanes(acc: [f64; 8]) -> f64 {
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

// Explicit AVX2 versions of the kernels above. Lanes `0..4` and `4..8` of the
// scalar accumulator live in two registers and are combined in the same
// order, so results are bit-identical.
#[cfg(target_arch = "x86_64")]
mod avx2 {
    use std::arch::x86_64::*;

    #[target_feature(enable = "avx2")]
    fn reduce(a: &[f32], b: &[f32], step: impl Fn(__m256d, __m256d, __m256d) -> __m256d) -> [f64; 8] {
        let mut lo = _mm256_setzero_pd();
        let mut hi = _mm256_setzero_pd();
        for (x, y) in a.chunks_exact(8).zip(b.chunks_exact(8)) {
            // SAFETY: both chunks hold exactly eight f32 values.
            let (x, y) = unsafe { (_mm256_loadu_ps(x.as_ptr()), _mm256_loadu_ps(y.as_ptr())) };
            let (x_lo, y_lo) = (_mm256_cvtps_pd(_mm256_castps256_ps128(x)), _mm256_cvtps_pd(_mm256_castps256_ps128(y)));
            let (x_hi, y_hi) = (
                _mm256_cvtps_pd(_mm256_extractf128_ps::<1>(x)),
                _mm256_cvtps_pd(_mm256_extractf128_ps::<1>(y)),
            );
            lo = step(lo, x_lo, y_lo);
            hi = step(hi, x_hi, y_hi);
        }
        let mut acc = [0.0f64; 8];
        // SAFETY: acc has room for two four-lane stores.
        unsafe {
            _mm256_storeu_pd(acc.as_mut_ptr(), lo);
            _mm256_storeu_pd(acc.as_mut_ptr().add(4), hi);
        }
        acc
    }

    #[target_feature(enable = "avx2")]
    pub(super) fn distance(a: &[f32], b: &[f32]) -> f64 {
        let acc = reduce(a, b, |acc, x, y| {
            let d = _mm256_sub_pd(x, y);
            _mm256_add_pd(acc, _mm256_mul_pd(d, d))
        });
        let split = a.len() - a.len() % 8;
        let tail: f64 = a[split..]
            .iter()
            .zip(&b[split..])
            .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
            .sum();
        (super::lanes(acc) + tail).sqrt()
    }

    #[target_feature(enable = "avx2")]
    pub(super) fn dot_distance(a: &[f32], b: &[f32]) -> (f64, f64) {
        let zero = _mm256_setzero_pd();
        let (mut p_lo, mut p_hi, mut s_lo, mut s_hi) = (zero, zero, zero, zero);
        for (x, y) in a.chunks_exact(8).zip(b.chunks_exact(8)) {
            // SAFETY: both chunks hold exactly eight f32 values.
            let (x, y) = unsafe { (_mm256_loadu_ps(x.as_ptr()), _mm256_loadu_ps(y.as_ptr())) };
            let (x_lo, y_lo) = (_mm256_cvtps_pd(_mm256_castps256_ps128(x)), _mm256_cvtps_pd(_mm256_castps256_ps128(y)));
            let (x_hi, y_hi) = (
                _mm256_cvtps_pd(_mm256_extractf128_ps::<1>(x)),
                _mm256_cvtps_pd(_mm256_extractf128_ps::<1>(y)),
            );
            p_lo = _mm256_add_pd(p_lo, _mm256_mul_pd(x_lo, y_lo));
            p_hi = _mm256_add_pd(p_hi, _mm256_mul_pd(x_hi, y_hi));
            let (d_lo, d_hi) = (_mm256_sub_pd(x_lo, y_lo), _mm256_sub_pd(x_hi, y_hi));
            s_lo = _mm256_add_pd(s_lo, _mm256_mul_pd(d_lo, d_lo));
            s_hi = _mm256_add_pd(s_hi, _mm256_mul_pd(d_hi, d_hi));
        }
        let mut prod = [0.0f64; 8];
        let mut sq = [0.0f64; 8];
        // SAFETY: each array has room for two four-lane stores.
        unsafe {
            _mm256_storeu_pd(prod.as_mut_ptr(), p_lo);
            _mm256_storeu_pd(prod.as_mut_ptr().add(4), p_hi);
            _mm256_storeu_pd(sq.as_mut_ptr(), s_lo);
            _mm256_storeu_pd(sq.as_mut_ptr().add(4), s_hi);
        }
        let split = a.len() - a.len() % 8;
        let (ta, tb) = (&a[split..], &b[split..]);
        let tail_prod: f64 = ta.iter().zip(tb).map(|(&x, &y)| x as f64 * y as f64).sum();
        let tail_sq: f64 = ta.iter().zip(tb).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum();
        (super::lanes(prod) + tail_prod, (super::lanes(sq) + tail_sq).sqrt())
    }

    #[target_feature(enable = "avx2")]
    pub(super) fn dot(a: &[f32], b: &[f32]) -> f64 {
        let acc = reduce(a, b, |acc, x, y| _mm256_add_pd(acc, _mm256_mul_pd(x, y)));
        let split = a.len() - a.len() % 8;
        let tail: f64 = a[split..].iter().zip(&b[split..]).map(|(&x, &y)| x as f64 * y as f64).sum();
        super::lanes(acc) + tail
    }
}

fn has_avx2() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("avx2")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// The fastest row distance the CPU supports.
pub(crate) fn distance_fn() -> RowKernel {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: AVX2 support was just checked at runtime.
        return |a, b| unsafe { avx2::distance(a, b) };
    }
    distance
}

/// The fastest row dot product the CPU supports.
pub(crate) fn dot_fn() -> RowKernel {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: AVX2 support was just checked at runtime.
        return |a, b| unsafe { avx2::dot(a, b) };
    }
    dot
}

/// The fastest fused dot product and distance the CPU supports.
pub(crate) fn dot_distance_fn() -> fn(&[f32], &[f32]) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: AVX2 support was just checked at runtime.
        return |a, b| unsafe { avx2::dot_distance(a, b) };
    }
    dot_distance
}

/// Rows per tile in [`for_each_pair`]; a tile of 768-wide rows stays in L1.
const PAIR_TILE: usize = 8;

/// Calls `sink(i, j, kernel(row_i, row_j))` for every row pair `i < j` of a
/// row-major buffer. Pairs are visited tile by tile rather than in row-major
/// order, so each streamed row is reused against a tile of cached rows.
pub(crate) fn for_each_pair<T>(
    data: &[f32],
    dim: usize,
    kernel: fn(&[f32], &[f32]) -> T,
    mut sink: impl FnMut(usize, usize, T),
) {
    let rows = data.len() / dim;
    let row = |t: usize| &data[t * dim..(t + 1) * dim];
    for tile in (0..rows).step_by(PAIR_TILE) {
        for j in tile + 1..rows {
            let b = row(j);
            for i in tile..j.min(tile + PAIR_TILE) {
                sink(i, j, kernel(row(i), b));
            }
        }
    }
}
