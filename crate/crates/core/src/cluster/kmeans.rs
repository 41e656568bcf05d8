//! Lloyd's K-Means with k-means++ seeding and several restarts.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{squared_distance, ClusterAssignment, ClusterError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeans {
    pub max_iter: usize,
    pub n_restarts: usize,
}

impl Default for KMeans {
    fn default() -> Self {
        KMeans {
            max_iter: 300,
            n_restarts: 10,
        }
    }
}

/// Result of the best restart.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: ClusterAssignment,
    /// Centroids indexed by canonical label.
    pub centroids: Array2<f64>,
    pub inertia: f64,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

struct Run {
    labels: Vec<usize>,
    centroids: Array2<f64>,
    inertia: f64,
    trace: Vec<f64>,
    converged: bool,
    n_iter: usize,
}

/// Nearest centroid per point (ties to the lowest centroid index), plus the
/// summed squared distances.
fn assign(x: ArrayView2<'_, f64>, centroids: &Array2<f64>, labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let (mut best, mut best_d) = (0, f64::INFINITY);
        for (c, centroid) in centroids.rows().into_iter().enumerate() {
            let d = squared_distance(x.row(i), centroid);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        *label = best;
        inertia += best_d;
    }
    inertia
}

fn plus_plus_init(x: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total weight")
        } else {
            // All remaining points coincide with a chosen centre.
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), x.row(next)));
        }
    }
    let mut centroids = Array2::zeros((k, x.ncols()));
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).assign(&x.row(i));
    }
    centroids
}

/// Moves each empty cluster onto the point farthest from its current
/// centroid, taken from a cluster with at least two members.
fn repair_empty(x: ArrayView2<'_, f64>, centroids: &mut Array2<f64>, labels: &mut [usize]) -> bool {
    let k = centroids.nrows();
    let mut repaired = false;
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return repaired;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] < 2 {
                continue;
            }
            let d = squared_distance(x.row(i), centroids.row(l));
            if far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        match far {
            Some((i, d)) if d > 0.0 => {
                labels[i] = empty;
                centroids.row_mut(empty).assign(&x.row(i));
                repaired = true;
            }
            // Every point sits on its centroid: nothing left to split.
            _ => return repaired,
        }
    }
}

fn update_centroids(x: ArrayView2<'_, f64>, centroids: &mut Array2<f64>, labels: &[usize]) {
    let k = centroids.nrows();
    let mut sums = Array2::<f64>::zeros(centroids.dim());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = sums.row_mut(l);
        row += &x.row(i);
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let mean = &sums.row(c) / count as f64;
            centroids.row_mut(c).assign(&mean);
        }
    }
}

impl KMeans {
    fn run(&self, x: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Run {
        let n = x.nrows();
        let mut centroids = plus_plus_init(x, k, rng);
        let mut labels = vec![0; n];
        let mut inertia = assign(x, &centroids, &mut labels);
        let mut trace = vec![inertia];
        let mut converged = false;
        let mut n_iter = 0;
        let mut next = vec![0; n];
        while n_iter < self.max_iter {
            n_iter += 1;
            repair_empty(x, &mut centroids, &mut labels);
            update_centroids(x, &mut centroids, &labels);
            let new_inertia = assign(x, &centroids, &mut next);
            debug_assert!(
                new_inertia <= inertia + 1e-9 * (1.0 + inertia),
                "inertia rose from {inertia} to {new_inertia}"
            );
            trace.push(new_inertia);
            inertia = new_inertia;
            if next == labels {
                converged = true;
                break;
            }
            std::mem::swap(&mut labels, &mut next);
        }
        Run {
            labels,
            centroids,
            inertia,
            trace,
            converged,
            n_iter,
        }
    }

    /// Clusters the rows of `x` into `k` groups; keeps the restart with the
    /// lowest inertia (earliest restart on ties).
    pub fn fit(&self, x: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<KMeansFit, ClusterError> {
        let n = x.nrows();
        if k < 1 || k > n {
            return Err(ClusterError::BadK { k, n });
        }
        if self.n_restarts == 0 || self.max_iter == 0 {
            return Err(ClusterError::InvalidParam(
                "max_iter and n_restarts must be positive".into(),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ClusterError::NonFinite);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<Run> = None;
        for _ in 0..self.n_restarts {
            let run = self.run(x, k, &mut rng);
            if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
        let best = best.expect("at least one restart");

        let assignment =
            ClusterAssignment::from_raw(&best.labels, best.converged, best.n_iter, |_, members| {
                let raw = best.labels[members[0]];
                let centroid = best.centroids.row(raw);
                let mut pick = (members[0], f64::INFINITY);
                for &m in members {
                    let d = squared_distance(x.row(m), centroid);
                    if d < pick.1 {
                        pick = (m, d);
                    }
                }
                pick.0
            });
        let mut centroids = Array2::zeros((assignment.k, x.ncols()));
        for (i, &l) in assignment.labels.iter().enumerate() {
            centroids.row_mut(l).assign(&best.centroids.row(best.labels[i]));
        }
        Ok(KMeansFit {
            assignment,
            centroids,
            inertia: best.inertia,
            inertia_trace: best.trace,
        })
    }
}

/// K-Means with the default 300 iterations and 10 restarts.
pub fn kmeans(x: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<ClusterAssignment, ClusterError> {
    KMeans::default().fit(x, k, seed).map(|f| f.assignment)
}
