//! Solvers for the binned misfit problem and the null-space projection.
//!
//! The binned problem is small and dense, so it is factored directly. The
//! null-space problem minimizes `½‖X − Y‖²_F` over pattern-supported `X`
//! with `X N_r = 0` and `N_l* X = 0`. Its Hessian is the identity, so the
//! Uzawa iteration with conjugate directions is plain CG on the dual system
//! `C C* λ = C y` followed by `x = y − C* λ`.

use nalgebra::{DMatrix, DVector};

use crate::binning::{BinAssignment, Part, Unknown};
use crate::csr::SparseMatrixCsr;
use crate::dense::{DenseMatrix, ScalarKind, C64, ZERO};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, pivoted_qr};
use crate::misfit::{build_misfit, ReducedSystem};
use crate::pattern::SparsityPattern;

/// Pattern size above which [`solve_exact`] refuses to materialize the
/// full Hessian.
pub const EXACT_NNZ_LIMIT: usize = 2000;

/// Default relative residual for [`impose_nullspaces`].
pub const DEFAULT_CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpdSolution {
    pub y: DVector<f64>,
    /// Diagonal shift used after the plain factorization failed.
    pub ridge: Option<f64>,
}

/// Lower Cholesky factor; `None` on a pivot that is not safely positive.
pub fn cholesky_real(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = h.nrows();
    let max_diag = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max);
    let floor = n as f64 * f64::EPSILON * max_diag;
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = h[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ y = b`.
pub fn cholesky_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Cholesky solve of the reduced system, retrying once with a ridge of
/// `1e-12 · trace(H) / n` when the factorization breaks down.
pub fn solve_spd(sys: &ReducedSystem) -> Result<SpdSolution> {
    solve_symmetric(&sys.hessian, &sys.rhs)
}

fn solve_symmetric(h: &DMatrix<f64>, b: &DVector<f64>) -> Result<SpdSolution> {
    let n = h.nrows();
    if h.ncols() != n || b.len() != n {
        return Err(Error::invalid("reduced system dimensions disagree"));
    }
    if n == 0 {
        return Ok(SpdSolution { y: DVector::zeros(0), ridge: None });
    }
    let scale = h.amax();
    if (0..n).any(|i| (0..i).any(|j| (h[(i, j)] - h[(j, i)]).abs() > 1e-13 * scale)) {
        return Err(Error::invalid("reduced Hessian is not symmetric"));
    }
    if let Some(l) = cholesky_real(h) {
        return Ok(SpdSolution { y: cholesky_solve(&l, b), ridge: None });
    }
    let trace = h.trace();
    if trace <= 0.0 {
        // only a vanishing Hessian has a nonpositive trace; its rhs vanishes too
        if b.amax() == 0.0 {
            return Ok(SpdSolution { y: DVector::zeros(n), ridge: Some(0.0) });
        }
        return Err(Error::Singular("zero Hessian with nonzero right-hand side".into()));
    }
    let ridge = 1e-12 * trace / n as f64;
    let mut shifted = h.clone();
    for i in 0..n {
        shifted[(i, i)] += ridge;
    }
    match cholesky_real(&shifted) {
        Some(l) => Ok(SpdSolution { y: cholesky_solve(&l, b), ridge: Some(ridge) }),
        None => Err(Error::Singular(format!(
            "Cholesky failed even with ridge {ridge:e}"
        ))),
    }
}

/// Gives every pattern entry the value of its bin(s).
pub fn expand_bins(y: &DVector<f64>, bins: &BinAssignment) -> Result<SparseMatrixCsr> {
    if y.len() != bins.n_bins() {
        return Err(Error::invalid(format!(
            "{} bin values for {} bins",
            y.len(),
            bins.n_bins()
        )));
    }
    let values = (0..bins.pattern().nnz())
        .map(|entry| {
            let re = y[bins.bin_of(Unknown { entry, part: Part::Real })];
            let im = match bins.kind() {
                ScalarKind::Real => 0.0,
                ScalarKind::Complex => y[bins.bin_of(Unknown { entry, part: Part::Imag })],
            };
            C64::new(re, im)
        })
        .collect();
    Ok(SparseMatrixCsr::from_pattern(bins.pattern(), values, bins.kind()))
}

/// Reads one value per bin back out of a pattern-supported matrix (the
/// first member of each bin). Inverse of [`expand_bins`] on bin-constant
/// matrices.
pub fn reduce_to_bins(x: &SparseMatrixCsr, bins: &BinAssignment) -> DVector<f64> {
    let values = x.values();
    DVector::from_iterator(
        bins.n_bins(),
        (0..bins.n_bins()).map(|b| {
            let u = bins.members(b)[0];
            match u.part {
                Part::Real => values[u.entry].re,
                Part::Imag => values[u.entry].im,
            }
        }),
    )
}

/// Linear constraints `X N_r = 0` and `N_l* X = 0` acting on the values of
/// a pattern-supported `X`.
///
/// Constraint order: `(row i, right-null column c)` for all `i` and `c`
/// (row-major in `i`), then `(column j, left-null column c)`.
#[derive(Debug, Clone)]
pub struct ConstraintOperator {
    pub pattern: SparsityPattern,
    pub right_null: DenseMatrix,
    pub left_null: DenseMatrix,
}

impl ConstraintOperator {
    pub fn new(
        pattern: SparsityPattern,
        right_null: DenseMatrix,
        left_null: DenseMatrix,
    ) -> Result<Self> {
        let (m, n) = pattern.shape();
        if right_null.nrows() != n || left_null.nrows() != m {
            return Err(Error::invalid("null-space bases do not match the pattern size"));
        }
        Ok(ConstraintOperator { pattern, right_null, left_null })
    }

    pub fn n_constraints(&self) -> usize {
        let (m, n) = self.pattern.shape();
        m * self.right_null.ncols() + self.left_null.ncols() * n
    }

    pub fn is_vacuous(&self) -> bool {
        self.right_null.ncols() == 0 && self.left_null.ncols() == 0
    }

    fn kind(&self) -> ScalarKind {
        self.right_null.kind().join(self.left_null.kind())
    }

    /// `C x` for the pattern values `x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let (m, n) = self.pattern.shape();
        let kr = self.right_null.ncols();
        let kl = self.left_null.ncols();
        let pos = self.pattern.positions();
        let mut out = vec![ZERO; self.n_constraints()];
        for i in 0..m {
            for p in self.pattern.row_range(i) {
                let j = pos[p].1;
                for c in 0..kr {
                    out[i * kr + c] += x[p] * self.right_null[(j, c)];
                }
            }
        }
        let base = m * kr;
        for j in 0..n {
            for &p in self.pattern.col_entries(j) {
                let i = pos[p].0;
                for c in 0..kl {
                    out[base + j * kl + c] += self.left_null[(i, c)].conj() * x[p];
                }
            }
        }
        out
    }

    /// `C* λ`, a vector of pattern values.
    pub fn apply_adjoint(&self, lambda: &[C64]) -> Vec<C64> {
        let (m, n) = self.pattern.shape();
        let kr = self.right_null.ncols();
        let kl = self.left_null.ncols();
        let pos = self.pattern.positions();
        let mut out = vec![ZERO; self.pattern.nnz()];
        for i in 0..m {
            for p in self.pattern.row_range(i) {
                let j = pos[p].1;
                for c in 0..kr {
                    out[p] += self.right_null[(j, c)].conj() * lambda[i * kr + c];
                }
            }
        }
        let base = m * kr;
        for j in 0..n {
            for &p in self.pattern.col_entries(j) {
                let i = pos[p].0;
                for c in 0..kl {
                    out[p] += self.left_null[(i, c)] * lambda[base + j * kl + c];
                }
            }
        }
        out
    }

    /// The constraints as a dense real matrix over the real parameterization
    /// (real parts, then imaginary parts for complex `kind`).
    pub fn real_matrix(&self, kind: ScalarKind) -> DMatrix<f64> {
        let nnz = self.pattern.nnz();
        let rows = self.n_constraints();
        let mut complex = DMatrix::<C64>::zeros(rows, nnz);
        let mut unit = vec![ZERO; nnz];
        for p in 0..nnz {
            unit[p] = C64::new(1.0, 0.0);
            for (r, v) in self.apply(&unit).into_iter().enumerate() {
                complex[(r, p)] = v;
            }
            unit[p] = ZERO;
        }
        match kind.join(self.kind()) {
            ScalarKind::Real => complex.map(|v| v.re),
            ScalarKind::Complex => {
                let mut out = DMatrix::zeros(2 * rows, 2 * nnz);
                for r in 0..rows {
                    for p in 0..nnz {
                        let v = complex[(r, p)];
                        out[(r, p)] = v.re;
                        out[(r, nnz + p)] = -v.im;
                        out[(rows + r, p)] = v.im;
                        out[(rows + r, nnz + p)] = v.re;
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Imposition {
    pub x: SparseMatrixCsr,
    pub iterations: usize,
    /// Final `‖C x‖ / max(‖C y‖, ‖y‖)`.
    pub relative_residual: f64,
    pub converged: bool,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |s, x| s + x.norm_sqr()).sqrt()
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Frobenius-nearest pattern-supported `X` to `y` satisfying the null-space
/// constraints, by CG on `C C* λ = C y`.
///
/// CG runs toward rounding level, capped at the number of constraints per
/// round. Up to two restarts from the current iterate recover accuracy lost
/// to recurrence drift; a round that does not reduce the residual is
/// discarded. The result has `converged = false` if the residual is above
/// `tol · max(‖C y‖, ‖y‖)`.
pub fn impose_nullspaces(
    y: &SparseMatrixCsr,
    c: &ConstraintOperator,
    tol: f64,
) -> Result<Imposition> {
    if y.shape() != c.pattern.shape() || y.nnz() != c.pattern.nnz() {
        return Err(Error::invalid("matrix does not conform to the constraint pattern"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("CG tolerance {tol} must be positive")));
    }
    let kind = y.kind().join(c.kind());
    let mut x: Vec<C64> = y.values().to_vec();
    let initial = norm(&c.apply(&x));
    let y_norm = norm(&x);
    let target = tol * initial.max(y_norm);
    // Iterate past the target toward rounding level so that a second
    // projection finds nothing left to do.
    let floor = f64::EPSILON * initial.max(y_norm);
    let mut iterations = 0;
    let cap = c.n_constraints().max(1);

    let mut residual = initial;
    for _round in 0..3 {
        if residual <= floor {
            break;
        }
        let b = c.apply(&x);
        let mut lambda = vec![ZERO; b.len()];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rho = dot(&r, &r).re;
        for _ in 0..cap {
            let q = c.apply(&c.apply_adjoint(&p));
            let pq = dot(&p, &q).re;
            if !(pq > 0.0) {
                break;
            }
            let alpha = rho / pq;
            for (l, pi) in lambda.iter_mut().zip(&p) {
                *l += alpha * pi;
            }
            for (ri, qi) in r.iter_mut().zip(&q) {
                *ri -= alpha * qi;
            }
            iterations += 1;
            let rho_next = dot(&r, &r).re;
            if rho_next.sqrt() <= floor {
                break;
            }
            let beta = rho_next / rho;
            rho = rho_next;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
        }
        let mut trial = x.clone();
        for (xi, d) in trial.iter_mut().zip(c.apply_adjoint(&lambda)) {
            *xi -= d;
        }
        let trial_residual = norm(&c.apply(&trial));
        if !(trial_residual < residual) {
            break;
        }
        x = trial;
        residual = trial_residual;
    }

    // The only feasible point left is zero up to rounding.
    if norm(&x) <= target && residual > 0.0 {
        x.iter_mut().for_each(|v| *v = ZERO);
        residual = 0.0;
    }

    let scale = initial.max(y_norm);
    let relative_residual = if scale == 0.0 { 0.0 } else { residual / scale };
    Ok(Imposition {
        x: SparseMatrixCsr::from_pattern(&c.pattern, x, kind),
        iterations,
        relative_residual,
        converged: residual <= target,
    })
}

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub x: SparseMatrixCsr,
    pub ridge: Option<f64>,
}

/// One-step minimization of `J` over the pattern with the null-space
/// constraints, by the null-space method on the dense KKT system: with `Z`
/// an orthonormal basis of `ker C` (from a pivoted QR of `Cᵀ`), solve
/// `(Zᵀ H Z) w = Zᵀ g` and set `x = Z w`.
pub fn solve_exact(
    a: &DenseMatrix,
    pinv: &DenseMatrix,
    pattern: &SparsityPattern,
    right_null: &DenseMatrix,
    left_null: &DenseMatrix,
) -> Result<ExactSolution> {
    if pattern.nnz() > EXACT_NNZ_LIMIT {
        return Err(Error::TooLarge { nnz: pattern.nnz(), limit: EXACT_NNZ_LIMIT });
    }
    if pattern.shape() != a.shape() {
        return Err(Error::invalid("pattern does not match the matrix size"));
    }
    let mis = build_misfit(a, pinv)?;
    let kind = mis.kind();
    let nnz = pattern.nnz();
    let h = mis.pattern_hessian(pattern, kind);
    let g = mis.pattern_rhs(pattern, kind);

    let constraints = ConstraintOperator::new(pattern.clone(), right_null.clone(), left_null.clone())?;
    let (w, ridge, z) = if constraints.is_vacuous() || nnz == 0 {
        let sol = solve_symmetric(&h, &g)?;
        (sol.y, sol.ridge, None)
    } else {
        let z = constraint_kernel(&constraints.real_matrix(kind))?;
        let hz = z.transpose() * &h * &z;
        let hz = 0.5 * (&hz + hz.transpose());
        let sol = solve_symmetric(&hz, &(z.transpose() * &g))?;
        (sol.y, sol.ridge, Some(z))
    };
    let coords = match z {
        Some(z) => z * w,
        None => w,
    };
    let values = (0..nnz)
        .map(|p| match kind {
            ScalarKind::Real => C64::new(coords[p], 0.0),
            ScalarKind::Complex => C64::new(coords[p], coords[nnz + p]),
        })
        .collect();
    Ok(ExactSolution { x: SparseMatrixCsr::from_pattern(pattern, values, kind), ridge })
}

/// Orthonormal basis of `ker C` from a pivoted QR of `Cᵀ`.
fn constraint_kernel(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = c.shape();
    let ct = DenseMatrix::from_fn(cols, rows, ScalarKind::Real, |i, j| C64::new(c[(j, i)], 0.0));
    let qr = pivoted_qr(&ct)?;
    let (rank, _) = numerical_rank(&qr.r_diagonal(), cols, rows);
    Ok(DMatrix::from_fn(cols, cols - rank, |i, j| qr.q[(i, rank + j)].re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::compute_bins;

    #[test]
    fn spd_small_cases() {
        let sys = ReducedSystem {
            hessian: DMatrix::from_diagonal_element(2, 2, 2.0),
            rhs: DVector::from_element(2, 2.0),
        };
        let sol = solve_spd(&sys).unwrap();
        assert!((sol.y - DVector::from_element(2, 1.0)).amax() < 1e-15);
        assert!(sol.ridge.is_none());
        let sys = ReducedSystem {
            hessian: DMatrix::from_element(1, 1, 4.0),
            rhs: DVector::from_element(1, 4.0),
        };
        assert!((solve_spd(&sys).unwrap().y[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_system_uses_ridge() {
        // rank one, rhs in range
        let sys = ReducedSystem {
            hessian: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            rhs: DVector::from_row_slice(&[2.0, 2.0]),
        };
        let sol = solve_spd(&sys).unwrap();
        assert!(sol.ridge.is_some());
        assert!((&sys.hessian * &sol.y - &sys.rhs).norm() < 1e-8);
    }

    #[test]
    fn zero_system_returns_zero() {
        let sys = ReducedSystem { hessian: DMatrix::zeros(3, 3), rhs: DVector::zeros(3) };
        let sol = solve_spd(&sys).unwrap();
        assert_eq!(sol.y, DVector::zeros(3));
        let bad = ReducedSystem { hessian: DMatrix::zeros(1, 1), rhs: DVector::from_element(1, 1.0) };
        assert!(matches!(solve_spd(&bad), Err(Error::Singular(_))));
    }

    #[test]
    fn asymmetric_hessian_rejected() {
        let sys = ReducedSystem {
            hessian: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]),
            rhs: DVector::zeros(2),
        };
        assert!(solve_spd(&sys).is_err());
    }

    #[test]
    fn expand_singleton_and_single_bin() {
        let a = DenseMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let pat = SparsityPattern::full(2, 2);
        let bins = compute_bins(&a, &pat, 0).unwrap();
        let y = DVector::from_row_slice(&[5.0, 6.0, 7.0, 8.0]);
        let x = expand_bins(&y, &bins).unwrap();
        assert_eq!(x.real_values().unwrap(), vec![5.0, 6.0, 7.0, 8.0]);
        assert_eq!(reduce_to_bins(&x, &bins), y);

        let one = compute_bins(&DenseMatrix::identity(2), &pat, 3).unwrap();
        assert_eq!(one.n_bins(), 2); // zeros, then ones
        let x = expand_bins(&DVector::from_row_slice(&[0.5, -1.0]), &one).unwrap();
        assert_eq!(x.real_values().unwrap(), vec![-1.0, 0.5, 0.5, -1.0]);
        assert!(expand_bins(&DVector::zeros(3), &one).is_err());
    }

    #[test]
    fn feasible_input_is_untouched() {
        let pat = SparsityPattern::full(2, 2);
        let right = DenseMatrix::from_real_rows(&[&[0.0], &[1.0]]);
        let left = DenseMatrix::zeros(2, 0, ScalarKind::Real);
        let c = ConstraintOperator::new(pat.clone(), right, left).unwrap();
        let y = SparseMatrixCsr::from_dense_on(&DenseMatrix::from_real_rows(&[&[1.0, 0.0], &[2.0, 0.0]]), &pat);
        let out = impose_nullspaces(&y, &c, DEFAULT_CG_TOL).unwrap();
        assert_eq!(out.x, y);
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }

    #[test]
    fn projection_removes_null_component() {
        let pat = SparsityPattern::full(2, 2);
        let right = DenseMatrix::from_real_rows(&[&[0.0], &[1.0]]);
        let left = DenseMatrix::zeros(2, 0, ScalarKind::Real);
        let c = ConstraintOperator::new(pat.clone(), right, left).unwrap();
        let y = SparseMatrixCsr::from_dense_on(&DenseMatrix::from_real_rows(&[&[1.0, 3.0], &[2.0, 4.0]]), &pat);
        let out = impose_nullspaces(&y, &c, DEFAULT_CG_TOL).unwrap();
        assert_eq!(out.x.to_dense(), DenseMatrix::from_real_rows(&[&[1.0, 0.0], &[2.0, 0.0]]));
        assert!(out.converged);
    }

    #[test]
    fn exact_solver_guards_size() {
        let n = 50;
        let a = DenseMatrix::identity(n);
        let pat = SparsityPattern::full(n, n);
        let empty = DenseMatrix::zeros(n, 0, ScalarKind::Real);
        assert!(matches!(
            solve_exact(&a, &a, &pat, &empty, &empty),
            Err(Error::TooLarge { nnz: 2500, .. })
        ));
    }

    #[test]
    fn exact_diagonal_identity() {
        let a = DenseMatrix::identity(3);
        let pat = SparsityPattern::new(3, 3, (0..3).map(|i| (i, i)).collect()).unwrap();
        let empty = DenseMatrix::zeros(3, 0, ScalarKind::Real);
        let sol = solve_exact(&a, &a, &pat, &empty, &empty).unwrap();
        assert!((&sol.x.to_dense() - &a).max_abs() < 1e-15);
    }
}
