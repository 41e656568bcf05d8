//! Dense symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! The matrices here are small (one similarity or covariance matrix per query
//! word, typically around a hundred rows), so the simple O(n³)-per-sweep
//! method is fast enough and very accurate.

use ndarray::{Array1, Array2, ArrayView2};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EigenError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {gap:e}")]
    Asymmetric { i: usize, j: usize, gap: f64 },
    #[error("matrix contains non-finite values")]
    NonFinite,
    #[error("matrix size {n} exceeds the configured cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("no convergence after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiOptions {
    pub max_n: usize,
    pub max_sweeps: usize,
    /// Target Frobenius norm of the off-diagonal part.
    pub tol: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        JacobiOptions {
            max_n: 2048,
            max_sweeps: 100,
            tol: 1e-10,
        }
    }
}

/// Eigenvalues in ascending order; column `i` of `vectors` belongs to `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
    pub sweeps: usize,
}

pub fn symmetric_eigen(m: ArrayView2<'_, f64>) -> Result<SymmetricEigen, EigenError> {
    symmetric_eigen_with(m, &JacobiOptions::default())
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[[i, j]] * a[[i, j]];
            }
        }
    }
    sum.sqrt()
}

pub fn symmetric_eigen_with(
    m: ArrayView2<'_, f64>,
    opts: &JacobiOptions,
) -> Result<SymmetricEigen, EigenError> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(EigenError::NotSquare { rows, cols });
    }
    let n = rows;
    if n > opts.max_n {
        return Err(EigenError::TooLarge { n, cap: opts.max_n });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let scale = m.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (m[[i, j]] - m[[j, i]]).abs();
            if gap > 1e-9 * scale {
                return Err(EigenError::Asymmetric { i, j, gap });
            }
        }
    }

    let mut a = m.to_owned();
    // Work on the exactly symmetric part.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Matrices with a large norm cannot reach an absolute 1e-10 in f64.
    let target = opts.tol.max(1e-14 * frob);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off < target || off == 0.0 {
            break;
        }
        if sweeps == opts.max_sweeps {
            return Err(EigenError::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]).then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                m[[i, j]] = x;
                m[[j, i]] = x;
            }
        }
        m
    }

    #[test]
    fn identity() {
        let e = symmetric_eigen(Array2::eye(4).view()).unwrap();
        assert!(e.values.iter().all(|&x| x == 1.0));
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn diagonal_is_sorted_with_axis_vectors() {
        let m = array![[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let e = symmetric_eigen(m.view()).unwrap();
        assert_eq!(e.values.to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(e.vectors.column(0).to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.vectors.column(1).to_vec(), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.vectors.column(2).to_vec(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let e = symmetric_eigen(array![[2.0, 1.0], [1.0, 2.0]].view()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for seed in 0..5 {
            let m = random_symmetric(20, seed);
            let e = symmetric_eigen(m.view()).unwrap();
            let v = &e.vectors;
            let recon = v.dot(&Array2::from_diag(&e.values)).dot(&v.t());
            let err = (&recon - &m).iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(err < 1e-7, "reconstruction error {err}");
            let gram = v.t().dot(v);
            let orth = (&gram - &Array2::<f64>::eye(20))
                .iter()
                .fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(orth < 1e-8);
            for i in 0..20 {
                let col = v.column(i);
                let resid = m.dot(&col) - &col * e.values[i];
                assert!(resid.iter().all(|x| x.abs() < 1e-7));
            }
            assert!(e.values.windows(2).into_iter().all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            symmetric_eigen(array![[1.0, 2.0], [0.0, 1.0]].view()),
            Err(EigenError::Asymmetric { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            symmetric_eigen(Array2::zeros((2, 3)).view()),
            Err(EigenError::NotSquare { .. })
        ));
        assert_eq!(
            symmetric_eigen(array![[f64::NAN]].view()),
            Err(EigenError::NonFinite)
        );
        let opts = JacobiOptions {
            max_n: 2,
            ..Default::default()
        };
        assert!(matches!(
            symmetric_eigen_with(Array2::eye(3).view(), &opts),
            Err(EigenError::TooLarge { n: 3, cap: 2 })
        ));
        let opts = JacobiOptions {
            max_sweeps: 0,
            ..Default::default()
        };
        assert!(matches!(
            symmetric_eigen_with(random_symmetric(5, 1).view(), &opts),
            Err(EigenError::NoConvergence { sweeps: 0, .. })
        ));
    }

    #[test]
    fn empty_matrix() {
        let e = symmetric_eigen(Array2::zeros((0, 0)).view()).unwrap();
        assert!(e.values.is_empty());
    }
}
