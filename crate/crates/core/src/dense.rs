//! Column-major dense matrices over real or complex scalars.
//!
//! Values are always stored as `Complex64`; the [`ScalarKind`] tag records
//! whether the imaginary parts are meaningful. Real inputs stay real through
//! every kernel in this crate because the arithmetic never introduces a
//! nonzero imaginary part when all operands have zero imaginary parts.

use std::ops::{Add, Index, IndexMut, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

impl ScalarKind {
    pub fn join(self, other: ScalarKind) -> ScalarKind {
        if self == ScalarKind::Complex || other == ScalarKind::Complex {
            ScalarKind::Complex
        } else {
            ScalarKind::Real
        }
    }

    /// Number of real parts per scalar.
    pub fn parts(self) -> usize {
        match self {
            ScalarKind::Real => 1,
            ScalarKind::Complex => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    kind: ScalarKind,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, kind: ScalarKind) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
            kind,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n, ScalarKind::Real);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        kind: ScalarKind,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                let v = f(i, j);
                data.push(match kind {
                    ScalarKind::Real => C64::new(v.re, 0.0),
                    ScalarKind::Complex => v,
                });
            }
        }
        DenseMatrix {
            rows,
            cols,
            data,
            kind,
        }
    }

    /// Builds a real matrix from row slices. Convenient for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Self::from_fn(m, n, ScalarKind::Real, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Builds a real matrix from column-major values with a leading dimension,
    /// as accepted by BLAS/LAPACK style interfaces.
    pub fn from_real_col_major(
        rows: usize,
        cols: usize,
        values: &[f64],
        leading_dim: usize,
    ) -> Result<Self> {
        check_layout(rows, cols, values.len(), leading_dim)?;
        let m = Self::from_fn(rows, cols, ScalarKind::Real, |i, j| {
            C64::new(values[i + j * leading_dim], 0.0)
        });
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn from_complex_col_major(
        rows: usize,
        cols: usize,
        values: &[C64],
        leading_dim: usize,
    ) -> Result<Self> {
        check_layout(rows, cols, values.len(), leading_dim)?;
        let m = Self::from_fn(rows, cols, ScalarKind::Complex, |i, j| {
            values[i + j * leading_dim]
        });
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn kind(&self) -> ScalarKind {
        self.kind
    }

    pub fn is_complex(&self) -> bool {
        self.kind == ScalarKind::Complex
    }

    /// Reinterprets the matrix with another scalar kind. Converting to real
    /// drops imaginary parts.
    pub fn with_kind(mut self, kind: ScalarKind) -> Self {
        if kind == ScalarKind::Real {
            for v in &mut self.data {
                v.im = 0.0;
            }
        }
        self.kind = kind;
        self
    }

    /// Column-major storage with leading dimension `nrows()`.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("matrix contains NaN or infinite values"))
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |s, v| s + v.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.kind, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.kind, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, self.kind, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let kind = if alpha.im != 0.0 {
            ScalarKind::Complex
        } else {
            self.kind
        };
        Self::from_fn(self.rows, self.cols, kind, |i, j| self[(i, j)] * alpha)
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols, self.kind.join(rhs.kind));
        for j in 0..rhs.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = rhs[(k, j)];
                if b == ZERO {
                    continue;
                }
                let a_col = &self.data[k * self.rows..(k + 1) * self.rows];
                for (o, a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        Self::from_fn(self.rows, cols.len(), self.kind, |i, j| self[(i, cols[j])])
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>, kind: ScalarKind) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), kind, |i, j| m[(i, j)])
    }
}

fn check_layout(rows: usize, cols: usize, len: usize, leading_dim: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("matrix dimensions must be at least 1"));
    }
    if leading_dim < rows {
        return Err(Error::invalid(format!(
            "leading dimension {leading_dim} is smaller than the row count {rows}"
        )));
    }
    let needed = leading_dim * (cols - 1) + rows;
    if len < needed {
        return Err(Error::invalid(format!(
            "value array has {len} entries, layout needs {needed}"
        )));
    }
    Ok(())
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add dimension mismatch");
        let kind = self.kind.join(rhs.kind);
        DenseMatrix::from_fn(self.rows, self.cols, kind, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub dimension mismatch");
        let kind = self.kind.join(rhs.kind);
        DenseMatrix::from_fn(self.rows, self.cols, kind, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}
