//! Dense square matrices and the spectral primitives the rest of the crate
//! is built on.
//!
//! Everything here targets the small systems this crate is about
//! (`n` up to a few dozen): plain row-major storage, no BLAS.

mod eigen;
mod expm;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub use eigen::{eigenvalues_2x2, sym_eig, EigenDecomposition, MAX_SWEEPS};
pub use expm::expm;

/// Relative symmetry tolerance used when accepting a matrix as symmetric.
pub const SYM_TOL: f64 = 1e-9;

/// Positive-definiteness threshold for a symmetric matrix with the given trace.
pub fn pd_tol(trace: f64) -> f64 {
    1e-12 * trace.abs().max(1.0)
}

/// Dense `n x n` real matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Aᵀ + A`.
    pub fn symmetric_sum(&self) -> SymMatrix {
        SymMatrix(Matrix::from_fn(self.n, |i, j| self[(i, j)] + self[(j, i)]))
    }

    /// Solves `self * X = B` by LU factorisation with partial pivoting.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.n != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: rhs.n,
            });
        }
        let n = self.n;
        let cols = lu_solve(self.data.clone(), n, rhs.data.clone(), n)?;
        Ok(Matrix { n, data: cols })
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.n))
    }
}

/// Solves the dense system `a * x = b` in place, where `a` is `n x n`
/// row-major and `b` is `n x m` row-major.
pub(crate) fn lu_solve(mut a: Vec<f64>, n: usize, mut b: Vec<f64>, m: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= f64::EPSILON * scale * n as f64 {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            for j in 0..m {
                b.swap(k * m + j, p * m + j);
            }
        }
        let akk = a[k * n + k];
        for i in (k + 1)..n {
            let f = a[i * n + k] / akk;
            if f == 0.0 {
                continue;
            }
            a[i * n + k] = 0.0;
            for j in (k + 1)..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            for j in 0..m {
                b[i * m + j] -= f * b[k * m + j];
            }
        }
    }
    for k in (0..n).rev() {
        let akk = a[k * n + k];
        for j in 0..m {
            let mut s = b[k * m + j];
            for i in (k + 1)..n {
                s -= a[k * n + i] * b[i * m + j];
            }
            b[k * m + j] = s / akk;
        }
    }
    Ok(b)
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

/// A symmetric matrix, stored with its entries averaged across the diagonal.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Accepts `m` if it is symmetric within [`SYM_TOL`] and stores
    /// `(m + mᵀ) / 2`.
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite { what: "symmetric matrix" });
        }
        let n = m.n;
        let scale = m.frobenius_norm().max(1.0);
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > SYM_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self::symmetrize(m))
    }

    /// `(m + mᵀ) / 2` without a tolerance check.
    pub fn symmetrize(m: Matrix) -> Self {
        let n = m.n;
        SymMatrix(Matrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn diag(values: &[f64]) -> Self {
        SymMatrix(Matrix::diag(values))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        sym_eig(self)
    }

    /// `(λ_min, λ_max)`.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        let d = sym_eig(self)?;
        Ok((d.min(), d.max()))
    }

    /// `xᵀ S x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let sx = self.0.mul_vec(x);
        x.iter().zip(&sx).map(|(a, b)| a * b).sum()
    }

    /// Eigendecomposition, failing unless every eigenvalue exceeds [`pd_tol`].
    pub fn require_pd(&self) -> Result<EigenDecomposition> {
        let d = sym_eig(self)?;
        if d.min() <= pd_tol(self.0.trace()) {
            return Err(Error::NotPositiveDefinite { lambda_min: d.min() });
        }
        Ok(d)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Induced Euclidean norm `√λ_max[MᵀM]`.
pub fn induced_norm2(m: &Matrix) -> Result<f64> {
    let mtm = SymMatrix::symmetrize(&m.transpose() * m);
    let d = sym_eig(&mtm)?;
    Ok(d.max().max(0.0).sqrt())
}

/// `‖x‖_H = √(xᵀHx)` for positive definite `H`.
pub fn weighted_vec_norm(x: &[f64], h: &SymMatrix) -> Result<f64> {
    if x.len() != h.n() {
        return Err(Error::Dimension {
            expected: h.n(),
            got: x.len(),
        });
    }
    h.require_pd()?;
    Ok(h.quadratic_form(x).max(0.0).sqrt())
}

/// Induced norm of `M` with respect to `‖·‖_H`: the 2-norm of `H^{1/2} M H^{-1/2}`.
pub fn weighted_induced_norm(m: &Matrix, h: &SymMatrix) -> Result<f64> {
    if m.n() != h.n() {
        return Err(Error::Dimension {
            expected: h.n(),
            got: m.n(),
        });
    }
    let d = h.require_pd()?;
    let root = d.map_values(f64::sqrt);
    let inv_root = d.map_values(|v| 1.0 / v.sqrt());
    let similar = &(&root * m) * &inv_root;
    induced_norm2(&similar)
}

/// Symmetric positive definite square root.
pub fn pd_sqrt(h: &SymMatrix) -> Result<SymMatrix> {
    let d = h.require_pd()?;
    Ok(SymMatrix::symmetrize(d.map_values(f64::sqrt)))
}
