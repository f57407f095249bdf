//! The misfit `J(X; A) = ½‖(X − A)A†‖²_F + ½‖A†(X − A)‖²_F` and its
//! quadratic-form pieces.
//!
//! With `G = A†`, `W_row = G*G` and `W_col = GG*`,
//!
//! ```text
//! J(X) = J(0) + ½⟨X W_col, X⟩ + ½⟨W_row X, X⟩ − Re⟨A W_col + W_row A, X⟩
//! ```
//!
//! so the Hessian couples two pattern entries only when they share a row
//! (through `W_col`) or a column (through `W_row`).

use nalgebra::{DMatrix, DVector};

use crate::binning::{BinAssignment, Part, Unknown};
use crate::dense::{DenseMatrix, ScalarKind, C64, ZERO};
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

#[derive(Debug, Clone)]
pub struct MisfitOperator {
    pub a: DenseMatrix,
    pub pinv: DenseMatrix,
    /// `A†* A†`, m x m.
    pub w_row: DenseMatrix,
    /// `A† A†*`, n x n.
    pub w_col: DenseMatrix,
    /// `A W_col + W_row A`, m x n.
    pub linear_term: DenseMatrix,
    /// `J(0; A)`.
    pub offset: f64,
}

pub fn build_misfit(a: &DenseMatrix, pinv: &DenseMatrix) -> Result<MisfitOperator> {
    let (m, n) = a.shape();
    if pinv.shape() != (n, m) {
        return Err(Error::invalid(format!(
            "pseudoinverse is {:?}, expected {:?}",
            pinv.shape(),
            (n, m)
        )));
    }
    let w_row = pinv.adjoint().matmul(pinv);
    let w_col = pinv.matmul(&pinv.adjoint());
    let linear_term = &a.matmul(&w_col) + &w_row.matmul(a);
    let offset = 0.5 * a.matmul(pinv).frobenius_norm().powi(2)
        + 0.5 * pinv.matmul(a).frobenius_norm().powi(2);
    Ok(MisfitOperator {
        a: a.clone(),
        pinv: pinv.clone(),
        w_row,
        w_col,
        linear_term,
        offset,
    })
}

/// `J(X; A)` by the defining formula.
pub fn objective(x: &DenseMatrix, a: &DenseMatrix, pinv: &DenseMatrix) -> f64 {
    let d = x - a;
    0.5 * d.matmul(pinv).frobenius_norm().powi(2) + 0.5 * pinv.matmul(&d).frobenius_norm().powi(2)
}

fn inner(u: &DenseMatrix, v: &DenseMatrix) -> C64 {
    u.as_slice().iter().zip(v.as_slice()).map(|(a, b)| b.conj() * a).sum()
}

impl MisfitOperator {
    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    pub fn kind(&self) -> ScalarKind {
        self.a.kind().join(self.pinv.kind())
    }

    /// `J(X)` through the quadratic expansion.
    pub fn expanded_objective(&self, x: &DenseMatrix) -> f64 {
        let quad = inner(&x.matmul(&self.w_col), x) + inner(&self.w_row.matmul(x), x);
        self.offset + 0.5 * quad.re - inner(&self.linear_term, x).re
    }

    /// Complex gradient `X W_col + W_row X − (A W_col + W_row A)`; its real
    /// and imaginary parts are the derivatives with respect to `Re X` and
    /// `Im X`.
    pub fn gradient(&self, x: &DenseMatrix) -> DenseMatrix {
        let g = &x.matmul(&self.w_col) + &self.w_row.matmul(x);
        &g - &self.linear_term
    }

    /// Hessian entry coupling positions `(i, j)` and `(k, l)`:
    /// `δ_ik (W_col)_lj + δ_jl (W_row)_ik`.
    pub fn pattern_hessian_entry(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> C64 {
        let mut h = ZERO;
        if i == k {
            h += self.w_col[(l, j)];
        }
        if j == l {
            h += self.w_row[(i, k)];
        }
        h
    }

    /// Calls `f(p, q, h_pq)` for every coupled pair of pattern entries.
    fn for_each_coupling(&self, pattern: &SparsityPattern, mut f: impl FnMut(usize, usize, C64)) {
        let pos = pattern.positions();
        for i in 0..pattern.nrows() {
            let range = pattern.row_range(i);
            for p in range.clone() {
                let j = pos[p].1;
                for q in range.clone() {
                    let l = pos[q].1;
                    f(p, q, self.w_col[(l, j)]);
                }
            }
        }
        for j in 0..pattern.ncols() {
            let entries = pattern.col_entries(j);
            for &p in entries {
                let i = pos[p].0;
                for &q in entries {
                    let k = pos[q].0;
                    f(p, q, self.w_row[(i, k)]);
                }
            }
        }
    }

    /// Pattern-restricted Hessian in the real parameterization: coordinates
    /// are the real parts of the pattern entries, followed by the imaginary
    /// parts when `kind` is complex.
    pub fn pattern_hessian(&self, pattern: &SparsityPattern, kind: ScalarKind) -> DMatrix<f64> {
        let nnz = pattern.nnz();
        let dim = nnz * kind.parts();
        let mut h = DMatrix::zeros(dim, dim);
        self.for_each_coupling(pattern, |p, q, v| {
            h[(p, q)] += v.re;
            if kind == ScalarKind::Complex {
                h[(p, nnz + q)] -= v.im;
                h[(nnz + p, q)] += v.im;
                h[(nnz + p, nnz + q)] += v.re;
            }
        });
        symmetrize(&mut h);
        h
    }

    /// Linear term restricted to the pattern, in the real parameterization.
    pub fn pattern_rhs(&self, pattern: &SparsityPattern, kind: ScalarKind) -> DVector<f64> {
        let nnz = pattern.nnz();
        let mut g = DVector::zeros(nnz * kind.parts());
        for (p, &(i, j)) in pattern.positions().iter().enumerate() {
            let v = self.linear_term[(i, j)];
            g[p] = v.re;
            if kind == ScalarKind::Complex {
                g[nnz + p] = v.im;
            }
        }
        g
    }
}

fn symmetrize(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
}

/// Bin-reduced quadratic `½ yᵀ H y − rhsᵀ y`, equal to `J − J(0)` on the
/// binned subspace.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub hessian: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn value(&self, y: &DVector<f64>) -> f64 {
        0.5 * y.dot(&(&self.hessian * y)) - self.rhs.dot(y)
    }
}

/// `Eᵀ H E` and `Eᵀ g` accumulated directly over coupled entry pairs, without
/// forming the pattern Hessian.
pub fn assemble_reduced(mis: &MisfitOperator, bins: &BinAssignment) -> Result<ReducedSystem> {
    let pattern = bins.pattern();
    if pattern.shape() != mis.shape() {
        return Err(Error::invalid("bin assignment does not match the misfit size"));
    }
    let complex = bins.kind() == ScalarKind::Complex;
    let nb = bins.n_bins();
    let re = |p| bins.bin_of(Unknown { entry: p, part: Part::Real });
    let im = |p| bins.bin_of(Unknown { entry: p, part: Part::Imag });

    let mut h = DMatrix::zeros(nb, nb);
    mis.for_each_coupling(pattern, |p, q, v| {
        h[(re(p), re(q))] += v.re;
        if complex {
            h[(re(p), im(q))] -= v.im;
            h[(im(p), re(q))] += v.im;
            h[(im(p), im(q))] += v.re;
        }
    });
    symmetrize(&mut h);

    let mut rhs = DVector::zeros(nb);
    for (p, &(i, j)) in pattern.positions().iter().enumerate() {
        let v = mis.linear_term[(i, j)];
        rhs[re(p)] += v.re;
        if complex {
            rhs[im(p)] += v.im;
        }
    }
    Ok(ReducedSystem { hessian: h, rhs })
}
