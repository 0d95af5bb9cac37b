use std::cmp::Ordering;

use super::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Upper limit on cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted ascending with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        Matrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map_values(|v| v)
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops to
/// `1e-14 * ‖S‖_F`. Eigenvectors are sign-normalised so their first
/// nonzero component is positive; equal eigenvalues are ordered by their
/// eigenvectors in descending lexicographic order, which makes the output
/// a deterministic function of the input.
pub fn sym_eig(s: &SymMatrix) -> Result<EigenDecomposition> {
    let n = s.n();
    let mut a = s.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let threshold = 1e-14 * a.frobenius_norm();

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                n,
                sweeps,
                residual: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // rotation angle annihilating a[p][q]
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col = v.column(j);
            if let Some(first) = col.iter().find(|x| x.abs() > 1e-14).copied() {
                if first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            (a[(j, j)], col)
        })
        .collect();
    pairs.sort_by(|x, y| {
        x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then_with(|| {
            x.1.iter()
                .zip(&y.1)
                .map(|(p, q)| q.partial_cmp(p).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });

    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = Matrix::from_fn(n, |i, j| pairs[j].1[i]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues of a general 2x2 matrix from its characteristic polynomial,
/// as `(re, im)` pairs. Used for diagnostics only.
pub fn eigenvalues_2x2(a: &Matrix) -> Result<[(f64, f64); 2]> {
    if a.n() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: a.n(),
        });
    }
    let half_tr = 0.5 * a.trace();
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = half_tr * half_tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        Ok([(half_tr - r, 0.0), (half_tr + r, 0.0)])
    } else {
        let r = (-disc).sqrt();
        Ok([(half_tr, -r), (half_tr, r)])
    }
}
