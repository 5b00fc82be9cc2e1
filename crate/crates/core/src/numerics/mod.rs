//! Small dense linear algebra and distribution kernels.
//!
//! Problems here have at most a few dozen observations and four columns, so
//! everything is unblocked and row-major. Projections onto a column space are
//! always applied through a factorised solve; a `T × T` projection matrix is
//! never formed.

use alloc::vec::Vec;
use core::ops::{Deref, Index};

mod dist;

pub use dist::{
    chi2_cdf_1df, chi2_sf_1df, ln_gamma, regularized_incomplete_beta, std_normal_cdf,
    std_normal_quantile, student_t_two_sided_p,
};

/// Relative pivot floor for [`Ldlt::factor`]: a pivot at or below
/// `SPD_RELATIVE_TOLERANCE * max(diag)` is rejected.
pub const SPD_RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("input is empty")]
    Empty,
    #[error("argument {0} is outside the open unit interval")]
    DomainError(f64),
}

/// A finite-valued real vector.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self, NumericsError> {
        if data.iter().all(|v| v.is_finite()) {
            Ok(Vector(data))
        } else {
            Err(NumericsError::NonFinite)
        }
    }

    pub fn zeros(len: usize) -> Self {
        Vector(alloc::vec![0.0; len])
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        Vector(data)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(NumericsError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a `T × k` matrix from `k` columns of equal length.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self, NumericsError> {
        let rows = columns.first().map_or(0, |c| c.len());
        let cols = columns.len();
        for c in columns {
            if c.len() != rows {
                return Err(NumericsError::DimensionMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    /// Appends the columns of `other` to the right of `self`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, NumericsError> {
        if other.rows != self.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Matrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// `A·v`
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vector, NumericsError> {
        if v.len() != self.cols {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(Vector(
            (0..self.rows).map(|i| dot(self.row(i), v)).collect(),
        ))
    }

    /// `Aᵀ·v`
    pub fn t_mul_vec(&self, v: &[f64]) -> Result<Vector, NumericsError> {
        if v.len() != self.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = alloc::vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(Vector(out))
    }

    /// `Aᵀ·B` for matrices with the same row count.
    pub fn t_mul(&self, other: &Matrix) -> Result<Matrix, NumericsError> {
        if other.rows != self.rows {
            return Err(NumericsError::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut data = alloc::vec![0.0; self.cols * other.cols];
        for i in 0..self.cols {
            for j in 0..other.cols {
                data[i * other.cols + j] =
                    (0..self.rows).map(|t| self[(t, i)] * other[(t, j)]).sum();
            }
        }
        Ok(Matrix {
            rows: self.cols,
            cols: other.cols,
            data,
        })
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sum_of_squares(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `XᵀX`. Mirrored entries are bit-identical.
pub fn gram(x: &Matrix) -> Result<Matrix, NumericsError> {
    if x.rows == 0 || x.cols == 0 {
        return Err(NumericsError::Empty);
    }
    let k = x.cols;
    let mut data = alloc::vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let s: f64 = (0..x.rows).map(|t| x[(t, i)] * x[(t, j)]).sum();
            data[i * k + j] = s;
            data[j * k + i] = s;
        }
    }
    Ok(Matrix {
        rows: k,
        cols: k,
        data,
    })
}

/// `A = L·D·Lᵀ` factorisation of a symmetric positive definite matrix.
///
/// Only the lower triangle of the input is read. The square-root-free form
/// keeps the scalar case exact: solving `[a]·x = b` yields exactly `b / a`.
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    // unit lower triangle, row-major, diagonal unused
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl Ldlt {
    pub fn factor(a: &Matrix) -> Result<Self, NumericsError> {
        if a.rows != a.cols {
            return Err(NumericsError::NotSquare {
                rows: a.rows,
                cols: a.cols,
            });
        }
        let n = a.rows;
        if n == 0 {
            return Err(NumericsError::Empty);
        }
        let max_diag = (0..n).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
        let floor = SPD_RELATIVE_TOLERANCE * max_diag.max(0.0);
        let mut lower = alloc::vec![0.0; n * n];
        let mut diag = alloc::vec![0.0; n];
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                let l = lower[j * n + k];
                d -= l * l * diag[k];
            }
            if d.is_nan() || d <= floor || max_diag <= 0.0 {
                return Err(NumericsError::NotPositiveDefinite { pivot: j, value: d });
            }
            diag[j] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= lower[i * n + k] * lower[j * n + k] * diag[k];
                }
                lower[i * n + j] = s / d;
            }
        }
        Ok(Ldlt { n, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vector, NumericsError> {
        let n = self.n;
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lower[i * n + k] * x[k];
            }
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lower[k * n + i] * x[k];
            }
        }
        Ok(Vector(x))
    }

    /// The `j`-th diagonal entry of `A⁻¹`.
    pub fn inverse_diagonal(&self, j: usize) -> f64 {
        let mut unit = alloc::vec![0.0; self.n];
        unit[j] = 1.0;
        // dimension always matches
        self.solve(&unit).map(|x| x[j]).unwrap_or(f64::NAN)
    }
}

/// Solves `A·x = b` for symmetric positive definite `A`.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vector, NumericsError> {
    Ldlt::factor(a)?.solve(b)
}

/// Projection onto the column space of a full-rank `W`, reusable across
/// many right-hand sides.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: Matrix,
    normal: Ldlt,
}

impl Projector {
    pub fn new(basis: &Matrix) -> Result<Self, NumericsError> {
        let normal = Ldlt::factor(&gram(basis)?)?;
        Ok(Projector {
            basis: basis.clone(),
            normal,
        })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Least-squares coefficients of `v` on the basis columns.
    pub fn coefficients(&self, v: &[f64]) -> Result<Vector, NumericsError> {
        self.normal.solve(&self.basis.t_mul_vec(v)?)
    }

    /// `P_W·v`
    pub fn project(&self, v: &[f64]) -> Result<Vector, NumericsError> {
        self.basis.mul_vec(&self.coefficients(v)?)
    }

    /// `(I − P_W)·v`
    pub fn annihilate(&self, v: &[f64]) -> Result<Vector, NumericsError> {
        let p = self.project(v)?;
        Ok(Vector(v.iter().zip(p.iter()).map(|(a, b)| a - b).collect()))
    }
}

/// `P_W·v = W (WᵀW)⁻¹ Wᵀ v`.
pub fn project(w: &Matrix, v: &[f64]) -> Result<Vector, NumericsError> {
    Projector::new(w)?.project(v)
}

/// `(I − P_W)·v`, the residual of regressing `v` on the columns of `W`.
pub fn annihilate(w: &Matrix, v: &[f64]) -> Result<Vector, NumericsError> {
    Projector::new(w)?.annihilate(v)
}
