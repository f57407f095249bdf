//! Rank-revealing QR, pseudoinverse and null-space bases.
//!
//! The factorization is a Householder QR with greedy column pivoting,
//! `A P = Q R`. Once the numerical rank `r` is known, `R` is truncated to
//! `[R11 R12; 0 0]` and everything else is derived from it:
//!
//! * `A† = P T† Q1*` with `T = [R11 R12]` and `T† = T* (T T*)^{-1}`,
//! * the left null space is spanned by the trailing `m - r` columns of `Q`,
//! * the right null space by `P [-R11^{-1} R12; I]`, orthonormalized.
//!
//! SVD appears only in [`condition_number`], [`singular_values`] and
//! [`svd_pseudoinverse`], which back diagnostics and tests.

use nalgebra::DMatrix;

use crate::dense::{DenseMatrix, ScalarKind, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative machine precision used by the default rank tolerance.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON;

/// Output of [`pivoted_qr`]: `a.select_columns(perm) == q * r`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    /// `perm[k]` is the original index of the column placed at position `k`.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    pub fn r_diagonal(&self) -> Vec<C64> {
        let k = self.r.nrows().min(self.r.ncols());
        (0..k).map(|i| self.r[(i, i)]).collect()
    }
}

/// Householder QR with column pivoting on the remaining column norms.
///
/// Norms are recomputed at every step instead of downdated, which keeps the
/// pivot order stable; ties go to the lowest column index.
pub fn pivoted_qr(a: &DenseMatrix) -> Result<PivotedQr> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid("pivoted QR of an empty matrix"));
    }
    a.ensure_finite()?;

    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    let mut reflectors: Vec<(Vec<C64>, C64)> = Vec::with_capacity(steps);

    for k in 0..steps {
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let norm: f64 = work.col(j)[k..].iter().map(|v| v.norm_sqr()).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        if best != k {
            swap_columns(&mut work, k, best);
            perm.swap(k, best);
        }

        let (v, tau) = {
            let col = &mut work.col_mut(k)[k..];
            let tau = householder(col);
            let mut v = col.to_vec();
            v[0] = ONE;
            for x in &mut col[1..] {
                *x = ZERO;
            }
            (v, tau)
        };
        if tau != ZERO {
            for j in k + 1..n {
                apply_reflector(&v, tau.conj(), &mut work.col_mut(j)[k..]);
            }
        }
        reflectors.push((v, tau));
    }

    let mut q = DenseMatrix::identity(m).with_kind(a.kind());
    for (k, (v, tau)) in reflectors.iter().enumerate().rev() {
        if *tau == ZERO {
            continue;
        }
        for j in 0..m {
            apply_reflector(v, *tau, &mut q.col_mut(j)[k..]);
        }
    }

    Ok(PivotedQr { q, r: work, perm })
}

/// Computes a reflector `H = I - tau v v*` with `v[0] = 1` such that
/// `H* x = (beta, 0, ..., 0)` with `beta` real. On return `x[0] = beta` and
/// `x[1..]` holds the tail of `v`.
fn householder(x: &mut [C64]) -> C64 {
    let alpha = x[0];
    let tail_norm = x[1..].iter().fold(0.0, |s, v| s + v.norm_sqr()).sqrt();
    if tail_norm == 0.0 && alpha.im == 0.0 {
        return ZERO;
    }
    let magnitude = alpha.norm().hypot(tail_norm);
    let beta = if alpha.re >= 0.0 { -magnitude } else { magnitude };
    let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = ONE / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = C64::new(beta, 0.0);
    tau
}

/// `c <- (I - tau v v*) c`
fn apply_reflector(v: &[C64], tau: C64, c: &mut [C64]) {
    let w: C64 = v.iter().zip(c.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
    if w == ZERO {
        return;
    }
    let s = tau * w;
    for (ci, vi) in c.iter_mut().zip(v) {
        *ci -= s * vi;
    }
}

fn swap_columns(m: &mut DenseMatrix, a: usize, b: usize) {
    for i in 0..m.nrows() {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}

/// Numerical rank from the diagonal of a pivoted `R`.
///
/// Returns `(rank, rank_tol)` with `rank_tol = max(m, n) * eps * |r_diag[0]|`;
/// the rank counts the leading diagonal entries above that tolerance.
pub fn numerical_rank(r_diag: &[C64], m: usize, n: usize) -> (usize, f64) {
    let lead = r_diag.first().map_or(0.0, |v| v.norm());
    let tol = m.max(n) as f64 * UNIT_ROUNDOFF * lead;
    (rank_with_tolerance(r_diag, tol), tol)
}

fn rank_with_tolerance(r_diag: &[C64], tol: f64) -> usize {
    r_diag.iter().take_while(|v| v.norm() > tol).count()
}

/// Everything derived from a rank-revealing QR of `A`.
#[derive(Debug, Clone)]
pub struct QrPinvFactorization {
    pub q: DenseMatrix,
    pub r11: DenseMatrix,
    pub r12: DenseMatrix,
    pub perm: Vec<usize>,
    pub rank: usize,
    pub rank_tol: f64,
    pub pinv: DenseMatrix,
    pub left_null: DenseMatrix,
    pub right_null: DenseMatrix,
}

impl QrPinvFactorization {
    /// Factors `a` and derives the pseudoinverse and both null-space bases.
    /// `rank_tol` overrides the default tolerance of [`numerical_rank`].
    pub fn new(a: &DenseMatrix, rank_tol: Option<f64>) -> Result<Self> {
        if let Some(tol) = rank_tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::invalid(format!("rank tolerance {tol} is not a nonnegative number")));
            }
        }
        let qr = pivoted_qr(a)?;
        let (m, n) = a.shape();
        let diag = qr.r_diagonal();
        let (rank, rank_tol) = match rank_tol {
            Some(tol) => (rank_with_tolerance(&diag, tol), tol),
            None => numerical_rank(&diag, m, n),
        };

        let r11 = DenseMatrix::from_fn(rank, rank, a.kind(), |i, j| {
            if i <= j {
                qr.r[(i, j)]
            } else {
                ZERO
            }
        });
        let r12 = DenseMatrix::from_fn(rank, n - rank, a.kind(), |i, j| qr.r[(i, rank + j)]);

        let mut f = QrPinvFactorization {
            q: qr.q,
            r11,
            r12,
            perm: qr.perm,
            rank,
            rank_tol,
            pinv: DenseMatrix::zeros(n, m, a.kind()),
            left_null: DenseMatrix::zeros(m, 0, a.kind()),
            right_null: DenseMatrix::zeros(n, 0, a.kind()),
        };
        f.pinv = pseudoinverse_from_qr(&f)?;
        f.left_null = left_nullspace_basis(&f);
        f.right_null = right_nullspace_basis(&f)?;
        Ok(f)
    }

    pub fn nrows(&self) -> usize {
        self.q.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.perm.len()
    }

    pub fn kind(&self) -> ScalarKind {
        self.q.kind()
    }

    /// True when both null spaces are trivial.
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.nrows() && self.rank == self.ncols()
    }
}

/// `A† = P T† Q1*` where `T = [R11 R12]`.
///
/// When `T` is square this is a triangular solve with `R11`; otherwise
/// `T† = T* (T T*)^{-1}` through the Cholesky factor of `T T*`.
pub fn pseudoinverse_from_qr(f: &QrPinvFactorization) -> Result<DenseMatrix> {
    let (m, n, r) = (f.nrows(), f.ncols(), f.rank);
    let kind = f.kind();
    if r == 0 {
        return Ok(DenseMatrix::zeros(n, m, kind));
    }
    let q1_adj = DenseMatrix::from_fn(r, m, kind, |i, j| f.q[(j, i)].conj());

    let permuted = if r == n {
        solve_upper(&f.r11, &q1_adj)
    } else {
        let t = DenseMatrix::from_fn(r, n, kind, |i, j| {
            if j < r {
                f.r11[(i, j)]
            } else {
                f.r12[(i, j - r)]
            }
        });
        let gram = t.matmul(&t.adjoint());
        let l = cholesky(&gram).map_err(|_| {
            Error::RankInconsistency(format!(
                "T T* is not positive definite at rank {r} (rank_tol {:e})",
                f.rank_tol
            ))
        })?;
        let z = solve_lower(&l, &q1_adj);
        let z = solve_upper(&l.adjoint(), &z);
        t.adjoint().matmul(&z)
    };

    let mut pinv = DenseMatrix::zeros(n, m, kind);
    for (k, &orig) in f.perm.iter().enumerate() {
        for j in 0..m {
            pinv[(orig, j)] = permuted[(k, j)];
        }
    }
    Ok(pinv)
}

/// Trailing `m - r` columns of `Q`; `A* basis = 0`.
pub fn left_nullspace_basis(f: &QrPinvFactorization) -> DenseMatrix {
    let cols: Vec<usize> = (f.rank..f.nrows()).collect();
    f.q.select_columns(&cols)
}

/// Orthonormal basis of the right null space built from `P [-R11^{-1} R12; I]`.
pub fn right_nullspace_basis(f: &QrPinvFactorization) -> Result<DenseMatrix> {
    let (n, r) = (f.ncols(), f.rank);
    let k = n - r;
    let kind = f.kind();
    if k == 0 {
        return Ok(DenseMatrix::zeros(n, 0, kind));
    }
    let top = if r > 0 {
        solve_upper(&f.r11, &f.r12)
    } else {
        DenseMatrix::zeros(0, k, kind)
    };
    let mut basis = DenseMatrix::zeros(n, k, kind);
    for (pos, &orig) in f.perm.iter().enumerate() {
        for c in 0..k {
            basis[(orig, c)] = if pos < r {
                -top[(pos, c)]
            } else if pos - r == c {
                ONE
            } else {
                ZERO
            };
        }
    }
    orthonormalize(&basis)
}

/// Orthonormalizes the columns by two passes of modified Gram-Schmidt.
///
/// Each output column is rotated so that its first non-negligible component
/// is real and positive.
pub fn orthonormalize(cols: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, k) = cols.shape();
    let mut out = cols.clone();
    for j in 0..k {
        let original = norm(out.col(j));
        if original == 0.0 {
            return Err(Error::RankInconsistency(format!("column {j} is zero")));
        }
        for _pass in 0..2 {
            for p in 0..j {
                let (done, rest) = split_cols(&mut out, p, j);
                let proj: C64 = done.iter().zip(rest.iter()).map(|(u, v)| u.conj() * v).sum();
                for (v, u) in rest.iter_mut().zip(done) {
                    *v -= proj * u;
                }
            }
        }
        let remaining = norm(out.col(j));
        if remaining <= 1e3 * UNIT_ROUNDOFF * original {
            return Err(Error::RankInconsistency(format!(
                "column {j} is numerically dependent on the preceding columns"
            )));
        }
        let col = out.col_mut(j);
        let phase = col
            .iter()
            .find(|v| v.norm() > 1e-10 * remaining)
            .map(|v| v.conj() / v.norm())
            .unwrap_or(ONE);
        let scale = phase / remaining;
        for v in col.iter_mut() {
            *v *= scale;
        }
    }
    debug_assert_eq!(out.nrows(), m);
    Ok(out)
}

fn norm(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |s, x| s + x.norm_sqr()).sqrt()
}

/// Borrows column `p` immutably and column `j > p` mutably.
fn split_cols(m: &mut DenseMatrix, p: usize, j: usize) -> (Vec<C64>, &mut [C64]) {
    let done = m.col(p).to_vec();
    (done, m.col_mut(j))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky of a non-square matrix");
    let mut l = DenseMatrix::zeros(n, n, a.kind());
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Singular(format!("non-positive pivot {d:e} at column {j}")));
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `U X = B` for upper triangular `U` (only the upper triangle is read).
pub fn solve_upper(u: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = u.nrows();
    assert_eq!(n, b.nrows());
    let mut x = b.clone();
    let kind = u.kind().join(b.kind());
    x = x.with_kind(kind);
    for c in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= u[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / u[(i, i)];
        }
    }
    x
}

/// Solves `L X = B` for lower triangular `L`.
pub fn solve_lower(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = l.nrows();
    assert_eq!(n, b.nrows());
    let kind = l.kind().join(b.kind());
    let mut x = b.clone().with_kind(kind);
    for c in 0..b.ncols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `sigma_1 / sigma_rank`, or infinity when `sigma_rank` vanishes.
pub fn condition_number(a: &DenseMatrix, rank: usize) -> Result<f64> {
    let s = singular_values(a);
    if rank == 0 || rank > s.len() {
        return Err(Error::invalid(format!(
            "rank {rank} outside 1..={} for condition number",
            s.len()
        )));
    }
    let low = s[rank - 1];
    Ok(if low == 0.0 { f64::INFINITY } else { s[0] / low })
}

/// SVD-based pseudoinverse, truncating singular values at
/// `max(m, n) * eps * sigma_1` unless a tolerance is given.
pub fn svd_pseudoinverse(a: &DenseMatrix, tol: Option<f64>) -> DenseMatrix {
    let (m, n) = a.shape();
    let svd = a.to_nalgebra().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = tol.unwrap_or(m.max(n) as f64 * UNIT_ROUNDOFF * smax);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::<C64>::zeros(n, m);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let v = vt.row(k).adjoint();
            let uh = u.column(k).adjoint();
            out += v * uh * C64::new(1.0 / s, 0.0);
        }
    }
    DenseMatrix::from_nalgebra(&out, a.kind())
}
