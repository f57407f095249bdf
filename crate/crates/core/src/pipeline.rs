//! End-to-end sparsification: factorization, pattern, bins, reduced solve,
//! optional null-space imposition, CSR output.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::compute_bins;
use crate::csr::SparseMatrixCsr;
use crate::dense::{DenseMatrix, C64};
use crate::error::{Error, Result, Stage};
use crate::linalg::{cholesky, singular_values, svd_pseudoinverse, QrPinvFactorization};
use crate::misfit::{assemble_reduced, build_misfit, objective};
use crate::pattern::{lp_pattern, SparsityPattern};
use crate::solver::{
    expand_bins, impose_nullspaces, solve_exact, solve_spd, ConstraintOperator, DEFAULT_CG_TOL,
    EXACT_NNZ_LIMIT,
};

/// Structure claimed for the input matrix. Integer codes follow the C enum
/// (`Undefined = -1`, `General = 0`, ...).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixType {
    #[default]
    Undefined = -1,
    General = 0,
    HermitianPosDef = 1,
    HermitianPosSemiDef = 2,
    Hermitian = 3,
    SkewHermitian = 4,
    ComplexSymmetric = 5,
}

impl MatrixType {
    pub const ALL: [MatrixType; 7] = [
        MatrixType::Undefined,
        MatrixType::General,
        MatrixType::HermitianPosDef,
        MatrixType::HermitianPosSemiDef,
        MatrixType::Hermitian,
        MatrixType::SkewHermitian,
        MatrixType::ComplexSymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixType::Undefined => "undefined",
            MatrixType::General => "general",
            MatrixType::HermitianPosDef => "hermitian_pos_def",
            MatrixType::HermitianPosSemiDef => "hermitian_pos_semi_def",
            MatrixType::Hermitian => "hermitian",
            MatrixType::SkewHermitian => "skew_hermitian",
            MatrixType::ComplexSymmetric => "complex_symmetric",
        }
    }

    pub fn code(self) -> i32 {
        self as i32
    }

    /// True for the kinds that relate `A` to a transform of itself.
    pub fn is_structured(self) -> bool {
        !matches!(self, MatrixType::Undefined | MatrixType::General)
    }

    /// The transform `g` with `A = g(A)` for structured kinds.
    fn mirror(self, x: &DenseMatrix) -> Option<DenseMatrix> {
        match self {
            MatrixType::Undefined | MatrixType::General => None,
            MatrixType::HermitianPosDef | MatrixType::HermitianPosSemiDef | MatrixType::Hermitian => {
                Some(x.adjoint())
            }
            MatrixType::SkewHermitian => Some(x.adjoint().scale(C64::new(-1.0, 0.0))),
            MatrixType::ComplexSymmetric => Some(x.transpose()),
        }
    }
}

impl fmt::Display for MatrixType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatrixType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown matrix type '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsifyConfig {
    pub sparsity_ratio: f64,
    pub sparsity_norm_p: f64,
    pub max_num_bins: usize,
    pub impose_null_spaces: bool,
    pub matrix_type: MatrixType,
    pub rank_tol_override: Option<f64>,
    pub cg_tol: f64,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig {
            sparsity_ratio: 0.8,
            sparsity_norm_p: 1.0,
            max_num_bins: 1000,
            impose_null_spaces: true,
            matrix_type: MatrixType::Undefined,
            rank_tol_override: None,
            cg_tol: DEFAULT_CG_TOL,
        }
    }
}

impl SparsifyConfig {
    pub fn new(ratio: f64, p: f64, max_num_bins: usize) -> Self {
        SparsifyConfig {
            sparsity_ratio: ratio,
            sparsity_norm_p: p,
            max_num_bins,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sparsity_ratio) {
            return Err(Error::invalid(format!(
                "sparsity_ratio {} outside [0, 1]",
                self.sparsity_ratio
            )));
        }
        if !(self.sparsity_norm_p >= 0.0) {
            return Err(Error::invalid(format!(
                "sparsity_norm_p {} outside [0, inf]",
                self.sparsity_norm_p
            )));
        }
        if let Some(tol) = self.rank_tol_override {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::invalid(format!("rank tolerance {tol} is invalid")));
            }
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(Error::invalid(format!("cg_tol {} outside (0, 1)", self.cg_tol)));
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub factorization: f64,
    pub pattern: f64,
    pub binning: f64,
    pub reduced_solve: f64,
    pub null_space: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparsifyReport {
    pub num_rows: usize,
    pub num_cols: usize,
    pub nnz: usize,
    /// Real unknowns before binning: pattern entries times scalar parts.
    pub n_unknowns: usize,
    pub n_bins: usize,
    pub rank: usize,
    pub rank_tol: f64,
    pub ridge_used: bool,
    pub ridge: Option<f64>,
    pub null_space_imposed: bool,
    pub cg_iterations: usize,
    pub cg_relative_residual: f64,
    pub cg_converged: bool,
    /// `J(X; A)` of the output.
    pub objective: f64,
    /// `J(Y; A)` of the binned intermediate.
    pub objective_intermediate: f64,
    /// `‖X N_r‖_F / ‖X‖_F`.
    pub right_null_residual: f64,
    /// `‖N_l* X‖_F / ‖X‖_F`.
    pub left_null_residual: f64,
    /// Relative distance of `Y` from the claimed structure before the
    /// symmetrizing post-step; `None` for unstructured types.
    pub intermediate_structure_residual: Option<f64>,
    pub output_structure_residual: Option<f64>,
    #[serde(skip)]
    pub timings: StageTimings,
    /// The binned intermediate `Y` before null-space imposition.
    #[serde(skip)]
    pub intermediate: SparseMatrixCsr,
}

/// True iff `a` has the claimed structure within `1e-12 ‖a‖_F`.
pub fn structure_check(a: &DenseMatrix, kind: MatrixType) -> Result<bool> {
    let Some(mirror) = kind.mirror(a) else {
        return Ok(true);
    };
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!(
            "{kind} requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let tol = 1e-12 * a.frobenius_norm();
    if (a - &mirror).frobenius_norm() > tol {
        return Ok(false);
    }
    let hermitian_part = || DenseMatrix::from_fn(a.nrows(), a.ncols(), a.kind(), |i, j| {
        (a[(i, j)] + a[(j, i)].conj()) * 0.5
    });
    Ok(match kind {
        MatrixType::HermitianPosDef => cholesky(&hermitian_part()).is_ok(),
        MatrixType::HermitianPosSemiDef => {
            let eig = hermitian_part().to_nalgebra().symmetric_eigenvalues();
            eig.iter().all(|&l| l >= -tol)
        }
        _ => true,
    })
}

/// `‖X − g(X)‖_F / ‖X‖_F` for the structure transform `g`, or `None` when
/// the type carries no structure.
pub fn structure_residual(x: &SparseMatrixCsr, kind: MatrixType) -> Option<f64> {
    let dense = x.to_dense();
    let mirror = kind.mirror(&dense)?;
    let norm = dense.frobenius_norm();
    Some(if norm == 0.0 {
        0.0
    } else {
        (&dense - &mirror).frobenius_norm() / norm
    })
}

/// Averages `X` with `g(X)` on its own (structure-symmetric) pattern.
fn symmetrize(x: &SparseMatrixCsr, kind: MatrixType) -> SparseMatrixCsr {
    let dense = x.to_dense();
    let Some(mirror) = kind.mirror(&dense) else {
        return x.clone();
    };
    let avg = (&dense + &mirror).scale(C64::new(0.5, 0.0));
    SparseMatrixCsr::from_dense_on(&avg.with_kind(x.kind()), &x.pattern())
}

/// Validates a structure claim and returns the input with the structure
/// made exact.
fn prepare_input(a: &DenseMatrix, kind: MatrixType) -> Result<DenseMatrix> {
    a.ensure_finite()?;
    if !structure_check(a, kind)? {
        return Err(Error::Structure(format!("input is not {kind} within 1e-12")));
    }
    Ok(match kind.mirror(a) {
        Some(mirror) => (a + &mirror).scale(C64::new(0.5, 0.0)).with_kind(a.kind()),
        None => a.clone(),
    })
}

/// Two-step sparsification with the row/column L_p pattern.
pub fn sparsify(a: &DenseMatrix, cfg: &SparsifyConfig) -> Result<(SparseMatrixCsr, SparsifyReport)> {
    cfg.validate()?;
    let a = prepare_input(a, cfg.matrix_type)?;
    let start = Instant::now();
    let fact = QrPinvFactorization::new(&a, cfg.rank_tol_override).map_err(|e| e.at(Stage::Factorization))?;
    let t_fact = start.elapsed().as_secs_f64();
    let t = Instant::now();
    let pattern = lp_pattern(&a, cfg.sparsity_ratio, cfg.sparsity_norm_p).map_err(|e| e.at(Stage::Pattern))?;
    let t_pattern = t.elapsed().as_secs_f64();
    let mut out = two_step(&a, &fact, &pattern, cfg)?;
    out.1.timings.factorization = t_fact;
    out.1.timings.pattern = t_pattern;
    out.1.timings.total = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Two-step sparsification on a given pattern.
pub fn sparsify_for_pattern(
    a: &DenseMatrix,
    pattern: &SparsityPattern,
    cfg: &SparsifyConfig,
) -> Result<(SparseMatrixCsr, SparsifyReport)> {
    cfg.validate()?;
    if pattern.shape() != a.shape() {
        return Err(Error::invalid(format!(
            "pattern is {:?} but the matrix is {:?}",
            pattern.shape(),
            a.shape()
        )));
    }
    let a = prepare_input(a, cfg.matrix_type)?;
    if cfg.matrix_type.is_structured() && *pattern != pattern.transpose() {
        return Err(Error::invalid(format!(
            "a {} input needs a symmetric pattern",
            cfg.matrix_type
        )));
    }
    let start = Instant::now();
    let fact = QrPinvFactorization::new(&a, cfg.rank_tol_override).map_err(|e| e.at(Stage::Factorization))?;
    let t_fact = start.elapsed().as_secs_f64();
    let mut out = two_step(&a, &fact, pattern, cfg)?;
    out.1.timings.factorization = t_fact;
    out.1.timings.total = start.elapsed().as_secs_f64();
    Ok(out)
}

fn relative(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn two_step(
    a: &DenseMatrix,
    fact: &QrPinvFactorization,
    pattern: &SparsityPattern,
    cfg: &SparsifyConfig,
) -> Result<(SparseMatrixCsr, SparsifyReport)> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let bins = compute_bins(a, pattern, cfg.max_num_bins).map_err(|e| e.at(Stage::Binning))?;
    timings.binning = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (y, ridge) = {
        let mis = build_misfit(a, &fact.pinv).map_err(|e| e.at(Stage::ReducedSolve))?;
        let sys = assemble_reduced(&mis, &bins).map_err(|e| e.at(Stage::ReducedSolve))?;
        let sol = solve_spd(&sys).map_err(|e| e.at(Stage::ReducedSolve))?;
        (expand_bins(&sol.y, &bins)?, sol.ridge)
    };
    timings.reduced_solve = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let constraints = ConstraintOperator::new(
        pattern.clone(),
        fact.right_null.clone(),
        fact.left_null.clone(),
    )?;
    let impose = cfg.impose_null_spaces && !constraints.is_vacuous();
    let (x, cg_iterations, cg_relative_residual, cg_converged) = if impose {
        let imp = impose_nullspaces(&y, &constraints, cfg.cg_tol)
            .map_err(|e| e.at(Stage::NullSpaceImposition))?;
        (imp.x, imp.iterations, imp.relative_residual, imp.converged)
    } else {
        (y.clone(), 0, 0.0, true)
    };
    timings.null_space = t.elapsed().as_secs_f64();

    let intermediate_structure_residual = structure_residual(&y, cfg.matrix_type);
    let output_structure_residual = structure_residual(&x, cfg.matrix_type);
    let x = match output_structure_residual {
        Some(res) if res > 1e-10 => {
            return Err(Error::Structure(format!(
                "output deviates from {} by {res:e}",
                cfg.matrix_type
            ))
            .at(Stage::StructureCheck));
        }
        Some(_) => symmetrize(&x, cfg.matrix_type),
        None => x,
    };

    let x_dense = x.to_dense();
    let x_norm = x_dense.frobenius_norm();
    let right_res = x_dense.matmul(&fact.right_null).frobenius_norm();
    let left_res = fact.left_null.adjoint().matmul(&x_dense).frobenius_norm();

    let report = SparsifyReport {
        num_rows: a.nrows(),
        num_cols: a.ncols(),
        nnz: pattern.nnz(),
        n_unknowns: bins.n_unknowns(),
        n_bins: bins.n_bins(),
        rank: fact.rank,
        rank_tol: fact.rank_tol,
        ridge_used: ridge.is_some(),
        ridge,
        null_space_imposed: impose,
        cg_iterations,
        cg_relative_residual,
        cg_converged,
        objective: objective(&x_dense, a, &fact.pinv),
        objective_intermediate: objective(&y.to_dense(), a, &fact.pinv),
        right_null_residual: relative(right_res, x_norm),
        left_null_residual: relative(left_res, x_norm),
        intermediate_structure_residual,
        output_structure_residual,
        timings,
        intermediate: y,
    };
    Ok((x, report))
}

/// One-step exact minimization with the L_p pattern.
pub fn sparsify_exact(a: &DenseMatrix, ratio: f64, p: f64) -> Result<SparseMatrixCsr> {
    let pattern = lp_pattern(a, ratio, p).map_err(|e| e.at(Stage::Pattern))?;
    sparsify_exact_for_pattern(a, &pattern)
}

/// One-step exact minimization on a given pattern.
pub fn sparsify_exact_for_pattern(a: &DenseMatrix, pattern: &SparsityPattern) -> Result<SparseMatrixCsr> {
    if pattern.nnz() > EXACT_NNZ_LIMIT {
        return Err(Error::TooLarge { nnz: pattern.nnz(), limit: EXACT_NNZ_LIMIT });
    }
    let fact = QrPinvFactorization::new(a, None).map_err(|e| e.at(Stage::Factorization))?;
    let sol = solve_exact(a, &fact.pinv, pattern, &fact.right_null, &fact.left_null)
        .map_err(|e| e.at(Stage::ExactSolve))?;
    Ok(sol.x)
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub rank: usize,
    /// `σ_1 / σ_rank` of `A† X`; infinite (`null` in JSON) when `σ_rank = 0`.
    pub cond_pinv_x: f64,
    /// `‖X† − A†‖_F / ‖A†‖_F`.
    pub rel_pinv_diff: f64,
    pub objective: f64,
    pub nnz: usize,
    /// `nnz / (m n)`.
    pub nnz_ratio: f64,
    /// Condition number of the pattern Hessian on the support of `X`.
    pub hessian_condition: Option<f64>,
}

/// Spectral diagnostics of a sparsified `x` against `a`. The Hessian
/// condition number is computed only when requested and the support has at
/// most [`EXACT_NNZ_LIMIT`] entries.
pub fn diagnostics(a: &DenseMatrix, x: &SparseMatrixCsr, with_hessian: bool) -> Result<Diagnostics> {
    if a.shape() != x.shape() {
        return Err(Error::invalid(format!(
            "sparse matrix is {:?} but the input is {:?}",
            x.shape(),
            a.shape()
        )));
    }
    let fact = QrPinvFactorization::new(a, None)?;
    let pinv = &fact.pinv;
    let xd = x.to_dense();

    let cond_pinv_x = if fact.rank == 0 {
        f64::INFINITY
    } else {
        let s = singular_values(&pinv.matmul(&xd));
        let low = s[fact.rank - 1];
        if low == 0.0 {
            f64::INFINITY
        } else {
            s[0] / low
        }
    };

    let pinv_norm = pinv.frobenius_norm();
    let diff = (&svd_pseudoinverse(&xd, None) - pinv).frobenius_norm();
    let rel_pinv_diff = if pinv_norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / pinv_norm
    };

    let hessian_condition = if with_hessian && x.nnz() <= EXACT_NNZ_LIMIT && x.nnz() > 0 {
        Some(pattern_hessian_condition(a, pinv, &x.pattern())?)
    } else {
        None
    };

    let (m, n) = a.shape();
    Ok(Diagnostics {
        rank: fact.rank,
        cond_pinv_x,
        rel_pinv_diff,
        objective: objective(&xd, a, pinv),
        nnz: x.nnz(),
        nnz_ratio: x.nnz() as f64 / (m * n) as f64,
        hessian_condition,
    })
}

/// Condition number `λ_max / λ_min` of the pattern Hessian (real
/// parameterization); infinite when it is singular.
pub fn pattern_hessian_condition(
    a: &DenseMatrix,
    pinv: &DenseMatrix,
    pattern: &SparsityPattern,
) -> Result<f64> {
    if pattern.nnz() > EXACT_NNZ_LIMIT {
        return Err(Error::TooLarge { nnz: pattern.nnz(), limit: EXACT_NNZ_LIMIT });
    }
    let mis = build_misfit(a, pinv)?;
    let kind = mis.kind();
    let h = mis.pattern_hessian(pattern, kind);
    let eig = h.symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if min <= 0.0 { f64::INFINITY } else { max / min })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub max_bins: usize,
    /// Bins actually used after dropping empty ones.
    pub n_bins: usize,
    pub cond_pinv_x: f64,
    pub rel_pinv_diff: f64,
    pub objective: f64,
}

/// Sparsifies `a` once per bin limit and reports the spectral diagnostics,
/// sorted by the actual bin count. Runs the limits in parallel.
pub fn sweep_bins(a: &DenseMatrix, cfg: &SparsifyConfig, bin_limits: &[usize]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let a = prepare_input(a, cfg.matrix_type)?;
    let fact = QrPinvFactorization::new(&a, cfg.rank_tol_override).map_err(|e| e.at(Stage::Factorization))?;
    let pattern = lp_pattern(&a, cfg.sparsity_ratio, cfg.sparsity_norm_p).map_err(|e| e.at(Stage::Pattern))?;
    let mut rows = bin_limits
        .par_iter()
        .map(|&max_bins| {
            let cfg = SparsifyConfig { max_num_bins: max_bins, ..cfg.clone() };
            let (x, report) = two_step(&a, &fact, &pattern, &cfg)?;
            let diag = diagnostics(&a, &x, false)?;
            Ok(SweepRow {
                max_bins,
                n_bins: report.n_bins,
                cond_pinv_x: diag.cond_pinv_x,
                rel_pinv_diff: diag.rel_pinv_diff,
                objective: report.objective,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.n_bins, r.max_bins));
    Ok(rows)
}

/// CSR arrays returned through the flat interface.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsrOutput<T> {
    pub row_offsets: Vec<usize>,
    pub column_ids: Vec<usize>,
    pub values: Vec<T>,
}

impl<T> CsrOutput<T> {
    fn fill(&mut self, x: &SparseMatrixCsr, f: impl Fn(C64) -> T) {
        self.row_offsets = x.row_offsets().to_vec();
        self.column_ids = x.column_ids().to_vec();
        self.values = x.values().iter().map(|&v| f(v)).collect();
    }
}

#[allow(clippy::too_many_arguments)]
fn flat_config(
    num_rows: i64,
    num_cols: i64,
    leading_dim: i64,
    ratio: f64,
    p: f64,
    max_num_bins: i64,
    impose_null_spaces: bool,
    matrix_type: MatrixType,
) -> Result<(usize, usize, usize, SparsifyConfig)> {
    if num_rows < 1 || num_cols < 1 {
        return Err(Error::invalid("num_rows and num_cols must be >= 1"));
    }
    if leading_dim < num_rows {
        return Err(Error::invalid("col_leading_dim must be >= num_rows"));
    }
    if max_num_bins < 0 {
        return Err(Error::invalid("max_num_bins must be >= 0"));
    }
    let cfg = SparsifyConfig {
        sparsity_ratio: ratio,
        sparsity_norm_p: p,
        max_num_bins: max_num_bins as usize,
        impose_null_spaces,
        matrix_type,
        ..Default::default()
    };
    Ok((num_rows as usize, num_cols as usize, leading_dim as usize, cfg))
}

/// Flat interface for real matrices: column-major input with a leading
/// dimension, CSR output, status 0 on success and a nonzero
/// [`Error::status_code`] otherwise. `out` is left untouched on failure.
#[allow(clippy::too_many_arguments)]
pub fn lpn(
    num_rows: i64,
    num_cols: i64,
    col_values: &[f64],
    col_leading_dim: i64,
    sparsity_ratio: f64,
    sparsity_norm_p: f64,
    max_num_bins: i64,
    impose_null_spaces: bool,
    matrix_type: MatrixType,
    out: &mut CsrOutput<f64>,
) -> i32 {
    let run = || -> Result<SparseMatrixCsr> {
        let (m, n, ld, cfg) = flat_config(
            num_rows,
            num_cols,
            col_leading_dim,
            sparsity_ratio,
            sparsity_norm_p,
            max_num_bins,
            impose_null_spaces,
            matrix_type,
        )?;
        let a = DenseMatrix::from_real_col_major(m, n, col_values, ld)?;
        Ok(sparsify(&a, &cfg)?.0)
    };
    match run() {
        Ok(x) => {
            out.fill(&x, |v| v.re);
            0
        }
        Err(e) => e.status_code(),
    }
}

/// Complex counterpart of [`lpn`].
#[allow(clippy::too_many_arguments)]
pub fn lpn_complex(
    num_rows: i64,
    num_cols: i64,
    col_values: &[C64],
    col_leading_dim: i64,
    sparsity_ratio: f64,
    sparsity_norm_p: f64,
    max_num_bins: i64,
    impose_null_spaces: bool,
    matrix_type: MatrixType,
    out: &mut CsrOutput<C64>,
) -> i32 {
    let run = || -> Result<SparseMatrixCsr> {
        let (m, n, ld, cfg) = flat_config(
            num_rows,
            num_cols,
            col_leading_dim,
            sparsity_ratio,
            sparsity_norm_p,
            max_num_bins,
            impose_null_spaces,
            matrix_type,
        )?;
        let a = DenseMatrix::from_complex_col_major(m, n, col_values, ld)?;
        Ok(sparsify(&a, &cfg)?.0)
    };
    match run() {
        Ok(x) => {
            out.fill(&x, |v| v);
            0
        }
        Err(e) => e.status_code(),
    }
}
