use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::{Error, Result};

/// Mean-centered projection onto the leading principal components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjector {
    pub mean: Vec<f64>,
    /// `k x n_features`, row-major, orthonormal rows.
    pub components: Vec<f64>,
    /// Variance along each component, non-increasing.
    pub explained_variance: Vec<f64>,
    pub k: usize,
}

/// Fits `k` components by eigendecomposition of the population covariance.
///
/// Components come in descending explained-variance order. Each component's
/// sign is fixed so that its largest-magnitude entry (first on ties) is positive.
pub fn fit_pca(features: &FeatureMatrix, k: usize) -> Result<PcaProjector> {
    let n = features.rows();
    let f = features.cols();
    if k < 1 || k > n.min(f) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={} for a {n} x {f} matrix",
            n.min(f)
        )));
    }
    if features.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("PCA input"));
    }

    let mut mean = vec![0.0f64; f];
    for row in features.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = DMatrix::<f64>::zeros(f, f);
    let mut centered = vec![0.0f64; f];
    for row in features.iter_rows() {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for i in 0..f {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..f {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    for i in 0..f {
        for j in i..f {
            let v = cov[(i, j)] / n as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(k * f);
    let mut explained_variance = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let column = eigen.eigenvectors.column(idx);
        let mut pivot = 0;
        for (i, v) in column.iter().enumerate() {
            if v.abs() > column[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if column[pivot] < 0.0 { -1.0 } else { 1.0 };
        components.extend(column.iter().map(|v| sign * v));
        explained_variance.push(eigen.eigenvalues[idx].max(0.0));
    }
    if components.iter().any(|v| !v.is_finite()) {
        return Err(Error::Computation("PCA eigensolve produced non-finite values".into()));
    }

    Ok(PcaProjector {
        mean,
        components,
        explained_variance,
        k,
    })
}

impl PcaProjector {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn component(&self, j: usize) -> &[f64] {
        let f = self.n_features();
        &self.components[j * f..(j + 1) * f]
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.len(),
            });
        }
        Ok((0..self.k)
            .map(|j| {
                self.component(j)
                    .iter()
                    .zip(x)
                    .zip(&self.mean)
                    .map(|((c, v), m)| c * (v - m))
                    .sum()
            })
            .collect())
    }

    pub fn reconstruct(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: z.len(),
            });
        }
        let mut out = self.mean.clone();
        for (j, &zj) in z.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.component(j)) {
                *o += zj * c;
            }
        }
        Ok(out)
    }

    pub fn project_matrix(&self, features: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut data = Vec::with_capacity(features.rows() * self.k);
        for row in features.iter_rows() {
            data.extend(self.project(row)?);
        }
        FeatureMatrix::new(data, features.rows(), self.k)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string(self).expect("projector serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: PcaProjector = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        let f = p.mean.len();
        if p.k == 0 || p.k > f || p.components.len() != p.k * f || p.explained_variance.len() != p.k {
            return Err(Error::Model("inconsistent PCA projector dimensions".into()));
        }
        if p.mean.iter().chain(&p.components).any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite PCA projector entry".into()));
        }
        Ok(p)
    }
}
