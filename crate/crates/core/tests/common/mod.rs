#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsify_core::{DenseMatrix, ScalarKind, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random(m: usize, n: usize, kind: ScalarKind, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(m, n, kind);
    for j in 0..n {
        for i in 0..m {
            let im = if kind == ScalarKind::Complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), im);
        }
    }
    a
}

/// Product of random `m x r` and `r x n` factors.
pub fn random_rank(m: usize, n: usize, r: usize, kind: ScalarKind, rng: &mut ChaCha8Rng) -> DenseMatrix {
    random(m, r, kind, rng).matmul(&random(r, n, kind, rng))
}

pub fn kind_of(complex: bool) -> ScalarKind {
    if complex {
        ScalarKind::Complex
    } else {
        ScalarKind::Real
    }
}

pub fn rel_diff(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    let d = (x - y).frobenius_norm();
    let s = y.frobenius_norm();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

pub fn to_na(a: &DenseMatrix) -> DMatrix<C64> {
    a.to_nalgebra()
}

/// Pseudoinverse through nalgebra's SVD, cutting at `tol`.
pub fn svd_pinv(a: &DenseMatrix, tol: f64) -> DenseMatrix {
    let svd = to_na(a).svd(true, true);
    DenseMatrix::from_nalgebra(&svd.pseudo_inverse(tol).unwrap(), a.kind())
}

/// Orthogonal projector onto the span of the columns of `basis`.
pub fn projector(basis: &DenseMatrix) -> DenseMatrix {
    basis.matmul(&basis.adjoint())
}

/// Projectors onto the left and right null spaces of `a`, from the SVD with
/// singular values at most `tol` treated as zero.
pub fn svd_null_projectors(a: &DenseMatrix, tol: f64) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    let na = to_na(a);
    // Full bases come from the eigenvectors of A A* and A* A.
    let left = (&na * na.adjoint()).symmetric_eigen();
    let right = (na.adjoint() * &na).symmetric_eigen();
    let pick = |vals: &nalgebra::DVector<f64>, vecs: &DMatrix<C64>, dim: usize| {
        let cols: Vec<usize> = (0..dim).filter(|&k| vals[k].abs().sqrt() <= tol).collect();
        let mut b = DenseMatrix::zeros(dim, cols.len(), ScalarKind::Complex);
        for (c, &k) in cols.iter().enumerate() {
            for i in 0..dim {
                b[(i, c)] = vecs[(i, k)];
            }
        }
        projector(&b)
    };
    (pick(&left.eigenvalues, &left.eigenvectors, m), pick(&right.eigenvalues, &right.eigenvectors, n))
}
