//! Sparsification of dense matrices.
//!
//! Given a dense `A`, [`sparsify`] returns a sparse `X` on a row/column
//! `L_p` pattern of `A` that minimizes
//! `J(X; A) = ½‖(X − A)A†‖²_F + ½‖A†(X − A)‖²_F`, with pattern entries tied
//! into bins of nearly equal input values. Optionally the output is projected
//! so that it shares the null spaces of `A`.
//!
//! ```
//! use sparsify_core::{sparsify, DenseMatrix, SparsifyConfig};
//!
//! let a = DenseMatrix::from_real_rows(&[&[4.0, 0.1], &[0.1, 3.0]]);
//! let (x, report) = sparsify(&a, &SparsifyConfig::new(0.9, 1.0, 0)).unwrap();
//! assert_eq!(x.nnz(), 2);
//! assert_eq!(report.rank, 2);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binning;
pub mod csr;
pub mod dense;
pub mod error;
pub mod gen;
pub mod linalg;
pub mod misfit;
pub mod mtx;
pub mod pattern;
pub mod pipeline;
pub mod solver;

pub use binning::{bins_equivalent, compute_bins, reduction_map, BinAssignment, Part, Unknown};
pub use csr::SparseMatrixCsr;
pub use dense::{DenseMatrix, ScalarKind, C64};
pub use error::{Error, Result, Stage};
pub use gen::{gen_test_matrix, GenOptions, TestMatrixKind};
pub use linalg::{
    condition_number, left_nullspace_basis, pivoted_qr, pseudoinverse_from_qr, right_nullspace_basis,
    singular_values, svd_pseudoinverse, PivotedQr, QrPinvFactorization, UNIT_ROUNDOFF,
};
pub use misfit::{assemble_reduced, build_misfit, objective, MisfitOperator, ReducedSystem};
pub use pattern::{lp_pattern, pattern_from_mask, SparsityPattern};
pub use pipeline::{
    diagnostics, lpn, lpn_complex, pattern_hessian_condition, sparsify, sparsify_exact,
    sparsify_exact_for_pattern, sparsify_for_pattern, structure_check, structure_residual, sweep_bins,
    CsrOutput, Diagnostics, MatrixType, SparsifyConfig, SparsifyReport, StageTimings, SweepRow,
};
pub use solver::{
    expand_bins, impose_nullspaces, reduce_to_bins, solve_exact, solve_spd, ConstraintOperator,
    ExactSolution, Imposition, SpdSolution, DEFAULT_CG_TOL, EXACT_NNZ_LIMIT,
};
