//! Affinity Propagation (Frey & Dueck message passing).
//!
//! Each iteration updates all responsibilities from the previous
//! availabilities, then all availabilities from the new responsibilities:
//!
//! ```text
//! r(i,k) = s(i,k) - max_{k' != k} [a(i,k') + s(i,k')]
//! a(i,k) = min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))   (i != k)
//! a(k,k) = sum_{i' != k} max(0, r(i',k))
//! ```
//!
//! and blends each new message with the old one: `new = λ·old + (1-λ)·computed`.
//! Points with `r(k,k) + a(k,k) > 0` are exemplars.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, ClusterAssignment, ClusterError, SimilarityMatrix};

/// Relative magnitude of the symmetric noise added to off-diagonal similarities.
pub const TIE_NOISE_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApParams {
    pub damping: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_window")]
    pub convergence_window: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_iter() -> usize {
    1000
}

fn default_window() -> usize {
    50
}

impl Default for ApParams {
    fn default() -> Self {
        ApParams {
            damping: 0.75,
            max_iter: default_max_iter(),
            convergence_window: default_window(),
            seed: 0,
        }
    }
}

impl ApParams {
    pub fn with_damping(damping: f64) -> Self {
        ApParams {
            damping,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if !(0.5..1.0).contains(&self.damping) {
            return Err(ClusterError::InvalidParam(format!(
                "damping must lie in [0.5, 1), got {}",
                self.damping
            )));
        }
        if self.max_iter == 0 || self.convergence_window == 0 {
            return Err(ClusterError::InvalidParam(
                "max_iter and convergence_window must be positive".into(),
            ));
        }
        if self.convergence_window >= self.max_iter {
            return Err(ClusterError::InvalidParam(format!(
                "convergence_window ({}) must be smaller than max_iter ({})",
                self.convergence_window, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Returns a copy of `s` whose off-diagonal entries carry a seed-derived,
/// symmetric relative perturbation of at most [`TIE_NOISE_SCALE`]. It breaks
/// exact ties between similarities without moving any value noticeably.
pub fn perturb_ties(s: &Array2<f64>, seed: u64) -> Array2<f64> {
    let n = s.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = s.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let u: f64 = rng.random_range(-1.0..1.0);
            let v = s[[i, j]] + TIE_NOISE_SCALE * s[[i, j]].abs() * u;
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Runs Affinity Propagation on `sim` (preference = its diagonal).
///
/// Stops once the same non-empty exemplar set has been observed for
/// `convergence_window` consecutive iterations, or after `max_iter`. If no
/// exemplar ever emerges, the point with the largest similarity row sum
/// becomes the single exemplar and `converged` is false.
pub fn affinity_propagation(
    sim: &SimilarityMatrix,
    params: &ApParams,
) -> Result<ClusterAssignment, ClusterError> {
    params.validate()?;
    let n = sim.len();
    if n == 0 {
        return Err(ClusterError::TooFewPoints { needed: 1, got: 0 });
    }
    if n == 1 {
        return Ok(ClusterAssignment {
            labels: vec![0],
            exemplars: vec![0],
            k: 1,
            converged: true,
            n_iter: 0,
        });
    }

    let s = perturb_ties(sim.matrix(), params.seed);
    let lambda = params.damping;
    let mut r = Array2::<f64>::zeros((n, n));
    let mut a = Array2::<f64>::zeros((n, n));
    let mut exemplars: Vec<usize> = Vec::new();
    let mut stable = 0usize;
    let mut converged = false;
    let mut n_iter = 0;

    for it in 1..=params.max_iter {
        n_iter = it;

        for i in 0..n {
            // Largest and second largest of a(i,k') + s(i,k').
            let (mut best, mut best_k, mut second) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
            for k in 0..n {
                let v = a[[i, k]] + s[[i, k]];
                if v > best {
                    second = best;
                    best = v;
                    best_k = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == best_k { second } else { best };
                let fresh = s[[i, k]] - competitor;
                r[[i, k]] = lambda * r[[i, k]] + (1.0 - lambda) * fresh;
            }
        }

        for k in 0..n {
            let mut support = 0.0;
            for i in 0..n {
                if i != k {
                    support += r[[i, k]].max(0.0);
                }
            }
            let self_r = r[[k, k]];
            for i in 0..n {
                let fresh = if i == k {
                    support
                } else {
                    (self_r + support - r[[i, k]].max(0.0)).min(0.0)
                };
                a[[i, k]] = lambda * a[[i, k]] + (1.0 - lambda) * fresh;
            }
        }

        let current: Vec<usize> = (0..n).filter(|&k| r[[k, k]] + a[[k, k]] > 0.0).collect();
        if !(0..n).all(|k| r[[k, k]].is_finite() && a[[k, k]].is_finite()) {
            return Err(ClusterError::Diverged(it));
        }
        if current == exemplars {
            stable += 1;
        } else {
            exemplars = current;
            stable = 1;
        }
        if stable >= params.convergence_window && !exemplars.is_empty() {
            converged = true;
            break;
        }
    }

    if exemplars.is_empty() {
        let fallback = argmax(s.rows().into_iter().map(|row| row.sum())).expect("n >= 2");
        return Ok(ClusterAssignment {
            labels: vec![0; n],
            exemplars: vec![fallback],
            k: 1,
            converged: false,
            n_iter,
        });
    }

    let raw: Vec<usize> = (0..n)
        .map(|i| match exemplars.binary_search(&i) {
            Ok(pos) => pos,
            Err(_) => argmax(exemplars.iter().map(|&e| s[[i, e]])).expect("non-empty"),
        })
        .collect();
    Ok(ClusterAssignment::from_raw(&raw, converged, n_iter, |_, members| {
        *members
            .iter()
            .find(|m| exemplars.binary_search(m).is_ok())
            .expect("every cluster holds its exemplar")
    }))
}

/// Number of clusters Affinity Propagation finds, clamped to `[1, n]`.
pub fn induce_k(sim: &SimilarityMatrix, params: &ApParams) -> Result<usize, ClusterError> {
    let a = affinity_propagation(sim, params)?;
    Ok(a.k.clamp(1, sim.len().max(1)))
}
