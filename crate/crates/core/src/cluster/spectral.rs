//! Spectral clustering on the symmetric normalized Laplacian.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{kmeans, squared_distance, ClusterAssignment, ClusterError};
use crate::linalg::symmetric_eigen;

/// Added to every degree so isolated vertices do not divide by zero.
const DEGREE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SpectralAffinity {
    /// `(1 + cos(x_i, x_j)) / 2`
    #[default]
    CosineShifted,
    /// `exp(-gamma ‖x_i - x_j‖²)`
    Rbf { gamma: f64 },
}

fn affinity_matrix(x: ArrayView2<'_, f64>, affinity: SpectralAffinity) -> Array2<f64> {
    let n = x.nrows();
    let norms: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match affinity {
                SpectralAffinity::CosineShifted => {
                    let cos = if norms[i] == 0.0 || norms[j] == 0.0 {
                        0.0
                    } else {
                        x.row(i).dot(&x.row(j)) / (norms[i] * norms[j])
                    };
                    0.5 * (1.0 + cos)
                }
                SpectralAffinity::Rbf { gamma } => (-gamma * squared_distance(x.row(i), x.row(j))).exp(),
            };
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    a
}

/// `L = I - D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(affinity: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = affinity.nrows();
    let inv_sqrt: Vec<f64> = affinity
        .sum_axis(Axis(1))
        .iter()
        .map(|d| 1.0 / (d + DEGREE_EPS).sqrt())
        .collect();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            l[[i, j]] = delta - inv_sqrt[i] * affinity[[i, j]] * inv_sqrt[j];
        }
    }
    l
}

/// Spectral clustering of a precomputed symmetric, non-negative affinity.
pub fn spectral_from_affinity(
    affinity: ArrayView2<'_, f64>,
    k: usize,
    seed: u64,
) -> Result<ClusterAssignment, ClusterError> {
    let (n, cols) = affinity.dim();
    if n != cols {
        return Err(ClusterError::NotSquare { rows: n, cols });
    }
    if n < 2 {
        return Err(ClusterError::TooFewPoints { needed: 2, got: n });
    }
    if k < 1 || k > n {
        return Err(ClusterError::BadK { k, n });
    }
    if affinity.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    if affinity.iter().any(|&v| v < 0.0) {
        return Err(ClusterError::InvalidParam("affinities must be non-negative".into()));
    }
    if k == 1 {
        return Ok(ClusterAssignment {
            labels: vec![0; n],
            exemplars: vec![0],
            k: 1,
            converged: true,
            n_iter: 0,
        });
    }

    let eig = symmetric_eigen(normalized_laplacian(affinity).view())?;
    let mut embedding = eig.vectors.slice(ndarray::s![.., ..k]).to_owned();
    for mut row in embedding.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    kmeans(embedding.view(), k, seed)
}

/// Spectral clustering of the rows of `x` into `k` groups.
pub fn spectral_clustering(
    x: ArrayView2<'_, f64>,
    k: usize,
    seed: u64,
    affinity: SpectralAffinity,
) -> Result<ClusterAssignment, ClusterError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    if let SpectralAffinity::Rbf { gamma } = affinity {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(ClusterError::InvalidParam(format!(
                "rbf gamma must be positive, got {gamma}"
            )));
        }
    }
    spectral_from_affinity(affinity_matrix(x, affinity).view(), k, seed)
}
