//! Structural descriptors: a fixed 70-d summary of a hidden-state trajectory.
//!
//! Layout of the concatenated vector:
//!
//! | slice    | family                                   |
//! |----------|------------------------------------------|
//! | `0..32`  | DFT power, `[mean_k, max_k]` for k=1..16 |
//! | `32..48` | smallest normalized-Laplacian eigenvalues|
//! | `48..54` | local variation                          |
//! | `54..70` | pairwise-distance histogram              |

mod kernel;
mod local;
mod shape;
mod spectral;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

pub use local::{local_variation, LOCAL_FEATURES};
pub use shape::{shape_coherence, SHAPE_BINS};
pub use spectral::{
    fft_features, laplacian_spectrum, normalized_laplacian, DFT_FREQUENCIES, DFT_PAD,
    EIGEN_SENTINEL, LAPLACIAN_EIGENVALUES,
};

use nalgebra::DMatrix;
use crate::trajectory::StateMatrix;
use crate::{Error, Result};

pub const DESCRIPTOR_DIM: usize = 70;
pub const SPECTRAL_DIM: usize = 2 * DFT_FREQUENCIES + LAPLACIAN_EIGENVALUES;

pub const FFT_RANGE: Range<usize> = 0..2 * DFT_FREQUENCIES;
pub const LAPLACIAN_RANGE: Range<usize> = 2 * DFT_FREQUENCIES..SPECTRAL_DIM;
pub const LOCAL_RANGE: Range<usize> = SPECTRAL_DIM..SPECTRAL_DIM + LOCAL_FEATURES;
pub const SHAPE_RANGE: Range<usize> = SPECTRAL_DIM + LOCAL_FEATURES..DESCRIPTOR_DIM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralDescriptor {
    pub spectral: [f64; SPECTRAL_DIM],
    pub local: [f64; LOCAL_FEATURES],
    pub shape: [f64; SHAPE_BINS],
}

impl StructuralDescriptor {
    pub fn to_array(&self) -> [f64; DESCRIPTOR_DIM] {
        let mut out = [0.0; DESCRIPTOR_DIM];
        out[..SPECTRAL_DIM].copy_from_slice(&self.spectral);
        out[LOCAL_RANGE].copy_from_slice(&self.local);
        out[SHAPE_RANGE].copy_from_slice(&self.shape);
        out
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.to_array().to_vec()
    }

    pub fn from_array(values: &[f64; DESCRIPTOR_DIM]) -> Self {
        StructuralDescriptor {
            spectral: values[..SPECTRAL_DIM].try_into().unwrap(),
            local: values[LOCAL_RANGE].try_into().unwrap(),
            shape: values[SHAPE_RANGE].try_into().unwrap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Global,
    Local,
    #[default]
    TwoScale,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Mode::Global),
            "local" => Ok(Mode::Local),
            "two_scale" | "two-scale" => Ok(Mode::TwoScale),
            other => Err(Error::InvalidArgument(format!(
                "unknown granularity mode {other:?} (expected global, local or two_scale)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Global => "global",
            Mode::Local => "local",
            Mode::TwoScale => "two_scale",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GranularityConfig {
    pub mode: Mode,
    pub window: usize,
    pub stride: usize,
}

impl Default for GranularityConfig {
    fn default() -> Self {
        GranularityConfig {
            mode: Mode::TwoScale,
            window: 5,
            stride: 2,
        }
    }
}

impl GranularityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidArgument(format!("window {} < 2", self.window)));
        }
        if self.stride < 1 {
            return Err(Error::InvalidArgument("stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Start rows of the local windows over a `rows`-token trajectory.
///
/// Windows start every `stride` rows; if the last one does not end on the
/// final token, a window ending exactly there is appended. A trajectory no
/// longer than the window is a single window starting at 0.
pub fn window_starts(rows: usize, window: usize, stride: usize) -> Vec<usize> {
    if rows <= window {
        return vec![0];
    }
    let last = rows - window;
    let mut starts: Vec<usize> = (0..=last).step_by(stride.max(1)).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// All three families on `h`, with no windowing.
pub fn global_descriptor(h: StateMatrix<'_>) -> Result<StructuralDescriptor> {
    h.check()?;
    let fft = fft_features(h, DFT_PAD, DFT_FREQUENCIES)?;

    // The Laplacian and the distance histogram share one pass over the pairs.
    let rows = h.rows();
    let norms = spectral::row_norms(h);
    let mut w = DMatrix::<f64>::zeros(rows, rows);
    let mut distances = Vec::with_capacity(rows * (rows - 1) / 2);
    kernel::for_each_pair(h.as_slice(), h.dim(), kernel::dot_distance_fn(), |i, j, (dot, dist)| {
        spectral::set_similarity(&mut w, &norms, i, j, dot);
        distances.push(dist);
    });
    let lap = spectral::laplacian_from_similarity(w);
    let eigen = spectral::smallest_eigenvalues(lap, LAPLACIAN_EIGENVALUES)?;
    let mut spectral = [0.0; SPECTRAL_DIM];
    spectral[FFT_RANGE].copy_from_slice(&fft);
    spectral[LAPLACIAN_RANGE].copy_from_slice(&eigen);
    Ok(StructuralDescriptor {
        spectral,
        local: local_variation(h)?,
        shape: shape::distance_histogram(&distances, SHAPE_BINS).try_into().unwrap(),
    })
}

/// Elementwise mean of the per-window descriptors.
pub fn local_descriptor(h: StateMatrix<'_>, window: usize, stride: usize) -> Result<StructuralDescriptor> {
    let rows = h.rows();
    let starts = window_starts(rows, window, stride);
    let mut acc = [0.0f64; DESCRIPTOR_DIM];
    for &start in &starts {
        let len = window.min(rows);
        let part = global_descriptor(h.window(start, len))?.to_array();
        for (a, v) in acc.iter_mut().zip(part) {
            *a += v;
        }
    }
    let n = starts.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(StructuralDescriptor::from_array(&acc))
}

/// The descriptor `u(H)` under the configured granularity.
pub fn descriptor(h: StateMatrix<'_>, cfg: &GranularityConfig) -> Result<StructuralDescriptor> {
    cfg.validate()?;
    h.check()?;
    match cfg.mode {
        Mode::Global => global_descriptor(h),
        Mode::Local => local_descriptor(h, cfg.window, cfg.stride),
        Mode::TwoScale => {
            let global = global_descriptor(h)?;
            if h.rows() <= cfg.window {
                return Ok(global);
            }
            let local = local_descriptor(h, cfg.window, cfg.stride)?.to_array();
            let mut out = global.to_array();
            for (g, l) in out.iter_mut().zip(local) {
                *g = (*g + l) / 2.0;
            }
            Ok(StructuralDescriptor::from_array(&out))
        }
    }
}

/// Which columns of a feature table an estimator sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureVariant {
    StructOnly,
    SemanticOnly,
    StructPlusSent,
    FftOnly,
    LapOnly,
    LocalOnly,
    ShapeOnly,
}

impl FeatureVariant {
    pub const ALL: [FeatureVariant; 7] = [
        FeatureVariant::StructOnly,
        FeatureVariant::SemanticOnly,
        FeatureVariant::StructPlusSent,
        FeatureVariant::FftOnly,
        FeatureVariant::LapOnly,
        FeatureVariant::LocalOnly,
        FeatureVariant::ShapeOnly,
    ];

    pub fn needs_semantic(self) -> bool {
        matches!(self, FeatureVariant::SemanticOnly | FeatureVariant::StructPlusSent)
    }

    /// Descriptor indices this variant uses (empty for semantic-only).
    pub fn descriptor_range(self) -> Range<usize> {
        match self {
            FeatureVariant::StructOnly | FeatureVariant::StructPlusSent => 0..DESCRIPTOR_DIM,
            FeatureVariant::SemanticOnly => 0..0,
            FeatureVariant::FftOnly => FFT_RANGE,
            FeatureVariant::LapOnly => LAPLACIAN_RANGE,
            FeatureVariant::LocalOnly => LOCAL_RANGE,
            FeatureVariant::ShapeOnly => SHAPE_RANGE,
        }
    }
}

impl FromStr for FeatureVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureVariant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown feature variant {s:?}")))
    }
}

impl fmt::Display for FeatureVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureVariant::StructOnly => "struct_only",
            FeatureVariant::SemanticOnly => "semantic_only",
            FeatureVariant::StructPlusSent => "struct_plus_sent",
            FeatureVariant::FftOnly => "fft_only",
            FeatureVariant::LapOnly => "lap_only",
            FeatureVariant::LocalOnly => "local_only",
            FeatureVariant::ShapeOnly => "shape_only",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(rows: usize, dim: usize) -> Vec<f32> {
        (0..rows * dim)
            .map(|i| ((i as f32) * 0.37).sin() + 0.1 * (i % dim) as f32)
            .collect()
    }

    #[test]
    fn window_schedule() {
        assert_eq!(window_starts(9, 5, 2), vec![0, 2, 4]);
        assert_eq!(window_starts(10, 5, 2), vec![0, 2, 4, 5]);
        assert_eq!(window_starts(4, 5, 2), vec![0]);
        assert_eq!(window_starts(5, 5, 2), vec![0]);
        assert_eq!(window_starts(6, 5, 3), vec![0, 1]);
    }

    #[test]
    fn every_mode_is_seventy_wide() {
        let data = wave(33, 4);
        let h = StateMatrix::new(&data, 4).unwrap();
        for mode in [Mode::Global, Mode::Local, Mode::TwoScale] {
            let cfg = GranularityConfig { mode, ..Default::default() };
            assert_eq!(descriptor(h, &cfg).unwrap().to_vec().len(), DESCRIPTOR_DIM);
        }
    }

    #[test]
    fn short_trajectory_two_scale_is_global() {
        let data = wave(4, 3);
        let h = StateMatrix::new(&data, 3).unwrap();
        let global = descriptor(h, &GranularityConfig { mode: Mode::Global, ..Default::default() }).unwrap();
        let two = descriptor(h, &GranularityConfig::default()).unwrap();
        let local = descriptor(h, &GranularityConfig { mode: Mode::Local, ..Default::default() }).unwrap();
        assert_eq!(global, two);
        assert_eq!(global, local);
    }

    #[test]
    fn rejects_bad_config() {
        let data = wave(8, 2);
        let h = StateMatrix::new(&data, 2).unwrap();
        let cfg = GranularityConfig { window: 1, ..Default::default() };
        assert!(descriptor(h, &cfg).is_err());
        let cfg = GranularityConfig { stride: 0, ..Default::default() };
        assert!(descriptor(h, &cfg).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in FeatureVariant::ALL {
            assert_eq!(v.to_string().parse::<FeatureVariant>().unwrap(), v);
        }
        assert!("tda_only".parse::<FeatureVariant>().is_err());
    }

    #[test]
    fn family_ranges_tile_the_descriptor() {
        assert_eq!(FFT_RANGE.len(), 32);
        assert_eq!(LAPLACIAN_RANGE.len(), 16);
        assert_eq!(LOCAL_RANGE.len(), 6);
        assert_eq!(SHAPE_RANGE.len(), 16);
        assert_eq!(SHAPE_RANGE.end, DESCRIPTOR_DIM);
    }
}
