use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{squared_distance, ClusterError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    NegSqEuclidean,
    Cosine,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neg-sq-euclidean" | "euclidean" => Ok(Metric::NegSqEuclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(format!(
                "unknown metric {other:?} (expected neg-sq-euclidean or cosine)"
            )),
        }
    }
}

/// Pairwise similarities with the preference written on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    s: Array2<f64>,
    metric: Metric,
    preference: f64,
}

impl SimilarityMatrix {
    /// Wraps a precomputed square matrix; its diagonal is overwritten with
    /// `preference`.
    pub fn from_matrix(
        mut s: Array2<f64>,
        metric: Metric,
        preference: f64,
    ) -> Result<Self, ClusterError> {
        let (rows, cols) = s.dim();
        if rows != cols {
            return Err(ClusterError::NotSquare { rows, cols });
        }
        if !preference.is_finite() || s.iter().any(|x| !x.is_finite()) {
            return Err(ClusterError::NonFinite);
        }
        s.diag_mut().fill(preference);
        Ok(SimilarityMatrix {
            s,
            metric,
            preference,
        })
    }

    pub fn len(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.s.nrows() == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn preference(&self) -> f64 {
        self.preference
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.s
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[[i, j]]
    }

    pub fn with_preference(mut self, preference: f64) -> Result<Self, ClusterError> {
        if !preference.is_finite() {
            return Err(ClusterError::NonFinite);
        }
        self.s.diag_mut().fill(preference);
        self.preference = preference;
        Ok(self)
    }

    /// Median of the off-diagonal entries (mean of the two middle values for
    /// an even count). `None` for fewer than two points.
    pub fn median_off_diagonal(&self) -> Option<f64> {
        let n = self.len();
        let mut vals: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    vals.push(self.s[[i, j]]);
                }
            }
        }
        if vals.is_empty() {
            return None;
        }
        vals.sort_by(f64::total_cmp);
        let m = vals.len() / 2;
        Some(if vals.len().is_multiple_of(2) {
            0.5 * (vals[m - 1] + vals[m])
        } else {
            vals[m]
        })
    }

    /// Writes the matrix as comma-separated rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in self.s.rows() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    }
}

fn cosine(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        a.dot(&b) / (na * nb)
    }
}

/// Builds the similarity matrix of the rows of `x`.
///
/// `NegSqEuclidean` gives `-‖x_i - x_j‖²`, `Cosine` gives the cosine of the
/// angle (0 when either row is the zero vector).
pub fn similarity_matrix(
    x: ArrayView2<'_, f64>,
    metric: Metric,
    preference: f64,
) -> Result<SimilarityMatrix, ClusterError> {
    let n = x.nrows();
    if n == 0 {
        return Err(ClusterError::TooFewPoints { needed: 1, got: 0 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match metric {
                Metric::NegSqEuclidean => -squared_distance(x.row(i), x.row(j)),
                Metric::Cosine => cosine(x.row(i), x.row(j)),
            };
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    SimilarityMatrix::from_matrix(s, metric, preference)
}
