//! Clustering of fingerprint matrices.
//!
//! [`affinity_propagation`] discovers the number of clusters on its own;
//! [`kmeans`] and [`spectral_clustering`] split the data into a given number
//! of groups. All of them are deterministic for a given seed and return
//! canonical labels (cluster ids in order of first appearance).

mod affinity;
mod kmeans;
mod similarity;
mod spectral;

use std::collections::HashMap;

pub use affinity::{affinity_propagation, induce_k, perturb_ties, ApParams, TIE_NOISE_SCALE};
pub use kmeans::{kmeans, KMeans, KMeansFit};
pub use similarity::{similarity_matrix, Metric, SimilarityMatrix};
pub use spectral::{
    normalized_laplacian, spectral_clustering, spectral_from_affinity, SpectralAffinity,
};

use crate::linalg::EigenError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("k = {k} is outside [1, {n}]")]
    BadK { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("similarity matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("affinity propagation produced non-finite messages at iteration {0}")]
    Diverged(usize),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// A partition of `n` points into `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    /// Cluster id per point, in `[0, k)`, numbered by first appearance.
    pub labels: Vec<usize>,
    /// One representative point per cluster, sorted by index.
    pub exemplars: Vec<usize>,
    pub k: usize,
    pub converged: bool,
    pub n_iter: usize,
}

impl ClusterAssignment {
    /// Builds an assignment from arbitrary cluster ids. `representative`
    /// receives a canonical label and the members of that cluster and
    /// returns the member to report as its exemplar.
    pub(crate) fn from_raw<F>(
        raw: &[usize],
        converged: bool,
        n_iter: usize,
        mut representative: F,
    ) -> Self
    where
        F: FnMut(usize, &[usize]) -> usize,
    {
        let labels = canonicalize(raw);
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        let mut exemplars: Vec<usize> = members
            .iter()
            .enumerate()
            .map(|(l, m)| representative(l, m))
            .collect();
        exemplars.sort_unstable();
        ClusterAssignment {
            labels,
            exemplars,
            k,
            converged,
            n_iter,
        }
    }

    /// Members of each cluster, indexed by label.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Renumbers labels so that ids appear in increasing order of first use.
pub fn canonicalize<T: std::hash::Hash + Eq + Copy>(raw: &[T]) -> Vec<usize> {
    let mut ids = HashMap::new();
    raw.iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect()
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax<I: IntoIterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn squared_distance(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
