mod common;

use common::*;
use sparsify_core::{
    diagnostics, lpn, objective, sparsify, sparsify_exact, sparsify_for_pattern, lp_pattern, CsrOutput,
    DenseMatrix, MatrixType, QrPinvFactorization, ScalarKind, SparseMatrixCsr, SparsifyConfig, C64,
};

fn cfg(ratio: f64, max_bins: usize, impose: bool) -> SparsifyConfig {
    SparsifyConfig { sparsity_ratio: ratio, max_num_bins: max_bins, impose_null_spaces: impose, ..Default::default() }
}

fn run(a: &DenseMatrix, c: &SparsifyConfig) -> DenseMatrix {
    sparsify(a, c).unwrap().0.to_dense()
}

#[test]
fn equivariance_under_sign_transpose_adjoint() {
    type G = fn(&DenseMatrix) -> DenseMatrix;
    let maps: [(&str, G); 4] = [
        ("neg", |x| x.scale(C64::new(-1.0, 0.0))),
        ("transpose", |x| x.transpose()),
        ("adjoint", |x| x.adjoint()),
        ("neg transpose", |x| x.transpose().scale(C64::new(-1.0, 0.0))),
    ];
    for seed in 0..10 {
        let mut rng = rng(seed + 40);
        let (m, n) = (5 + seed as usize % 4, 4 + seed as usize % 5);
        let kind = kind_of(seed % 2 == 0);
        let a = if seed % 3 == 0 { random_rank(m, n, m.min(n) - 1, kind, &mut rng) } else { random(m, n, kind, &mut rng) };
        for max_bins in [0, 7] {
            let c = cfg(0.7, max_bins, true);
            let x = run(&a, &c);
            for (name, g) in maps {
                let lhs = run(&g(&a), &c);
                assert!(rel_diff(&lhs, &g(&x)) <= 1e-10, "seed {seed} {name} bins {max_bins}: {}", rel_diff(&lhs, &g(&x)));
            }
        }
    }
}

#[test]
fn scaling_commutes() {
    for seed in 0..10 {
        let mut rng = rng(seed + 80);
        let kind = kind_of(seed % 2 == 1);
        let a = random(6, 6, kind, &mut rng);
        let c = cfg(0.8, 9, true);
        let x = run(&a, &c);
        for alpha in [C64::new(3.7, 0.0), C64::new(-0.02, 0.0), C64::new(1e3, 0.0)] {
            let lhs = run(&a.scale(alpha), &c);
            assert!(rel_diff(&lhs, &x.scale(alpha)) <= 1e-10, "seed {seed} alpha {alpha}");
        }
    }
}

#[test]
fn structure_is_preserved_before_symmetrization() {
    let kinds = [MatrixType::Hermitian, MatrixType::SkewHermitian, MatrixType::ComplexSymmetric];
    for (t, kind) in kinds.into_iter().enumerate() {
        for seed in 0..6u64 {
            let mut rng = rng(seed * 7 + t as u64);
            let n = 8 + 3 * seed as usize;
            let b = random(n, n, ScalarKind::Complex, &mut rng);
            let a = match kind {
                MatrixType::Hermitian => &b + &b.adjoint(),
                MatrixType::SkewHermitian => &b - &b.adjoint(),
                _ => &b + &b.transpose(),
            };
            for max_bins in [16, 256, 0] {
                let c = SparsifyConfig { matrix_type: kind, ..cfg(0.6, max_bins, true) };
                let (x, report) = sparsify(&a, &c).unwrap();
                assert!(report.intermediate_structure_residual.unwrap() <= 1e-10);
                assert!(report.output_structure_residual.unwrap() <= 1e-10);
                let xd = x.to_dense();
                let mirror = match kind {
                    MatrixType::Hermitian => xd.adjoint(),
                    MatrixType::SkewHermitian => xd.adjoint().scale(C64::new(-1.0, 0.0)),
                    _ => xd.transpose(),
                };
                assert_eq!(xd, mirror);
            }
        }
    }
}

#[test]
fn null_spaces_are_contained() {
    for seed in 0..10 {
        let mut rng = rng(seed + 300);
        let kind = kind_of(seed % 2 == 0);
        let (m, n) = (6 + seed as usize % 3, 5 + seed as usize % 4);
        let a = random_rank(m, n, m.min(n) - 1 - seed as usize % 3, kind, &mut rng);
        let f = QrPinvFactorization::new(&a, None).unwrap();
        let (x, report) = sparsify(&a, &cfg(0.8, 20, true)).unwrap();
        assert!(report.null_space_imposed);
        assert!(report.cg_converged);
        let xd = x.to_dense();
        let xn = xd.frobenius_norm();
        assert!(xd.matmul(&f.right_null).frobenius_norm() <= 1e-10 * xn);
        assert!(f.left_null.adjoint().matmul(&xd).frobenius_norm() <= 1e-10 * xn);
        assert!(report.right_null_residual <= 1e-10 && report.left_null_residual <= 1e-10);
    }
}

#[test]
fn objective_decreases_with_finer_bins() {
    for seed in 0..10 {
        let mut rng = rng(seed + 900);
        let n = 8 + seed as usize % 5;
        let a = random(n, n, kind_of(seed % 2 == 1), &mut rng);
        let pattern = lp_pattern(&a, 0.7, 1.0).unwrap();
        let f = QrPinvFactorization::new(&a, None).unwrap();
        let exact = sparsify_exact(&a, 0.7, 1.0).unwrap().to_dense();
        let je = objective(&exact, &a, &f.pinv);
        let mut prev = f64::INFINITY;
        for max_bins in [8, 32, 128, 512, 0] {
            let (x, report) = sparsify_for_pattern(&a, &pattern, &cfg(0.7, max_bins, false)).unwrap();
            let j = objective(&x.to_dense(), &a, &f.pinv);
            assert!((report.objective - j).abs() <= 1e-12 * j.max(1.0));
            assert!(j <= prev + 1e-10, "seed {seed}: bins {max_bins} gave {j} after {prev}");
            assert!(j >= je - 1e-10 * je.max(1.0));
            prev = j;
        }
    }
}

#[test]
fn degenerate_inputs_never_fail() {
    let cases = [
        DenseMatrix::zeros(3, 4, ScalarKind::Real),
        DenseMatrix::from_real_rows(&[&[1e-300, 0.0], &[0.0, 1e300]]),
        DenseMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]),
        DenseMatrix::from_real_rows(&[&[5.0]]),
        DenseMatrix::from_real_rows(&[&[1.0, 2.0, 3.0]]),
    ];
    for a in &cases {
        for ratio in [0.0, 0.5, 1.0] {
            for p in [0.0, 1.0, 2.0, f64::INFINITY] {
                for max_bins in [0, 1, 3] {
                    for impose in [false, true] {
                        let c = SparsifyConfig { sparsity_norm_p: p, ..cfg(ratio, max_bins, impose) };
                        let (x, _) = sparsify(a, &c).unwrap_or_else(|e| panic!("{a:?} {c:?}: {e}"));
                        assert!(x.to_dense().is_finite());
                    }
                }
            }
        }
    }
}

#[test]
fn flat_interface_agrees_with_library() {
    let mut rng = rng(4);
    let a = random(5, 4, ScalarKind::Real, &mut rng);
    let ld = 7;
    let mut col = vec![f64::NAN; ld * 4];
    for j in 0..4 {
        for i in 0..5 {
            col[j * ld + i] = a[(i, j)].re;
        }
    }
    let mut out = CsrOutput::default();
    assert_eq!(lpn(5, 4, &col, ld as i64, 0.8, 1.0, 10, true, MatrixType::General, &mut out), 0);
    let (x, _) = sparsify(&a, &cfg(0.8, 10, true)).unwrap();
    assert_eq!(out.row_offsets, x.row_offsets());
    assert_eq!(out.column_ids, x.column_ids());
    assert_eq!(out.values, x.real_values().unwrap());
}

#[test]
fn diagnostics_of_the_input_itself() {
    let mut rng = rng(8);
    let a = random(6, 6, ScalarKind::Complex, &mut rng);
    let d = diagnostics(&a, &SparseMatrixCsr::from_dense(&a), true).unwrap();
    assert_eq!(d.rank, 6);
    assert!((d.cond_pinv_x - 1.0).abs() < 1e-10);
    assert!(d.rel_pinv_diff < 1e-10);
    assert_eq!(d.nnz, 36);
    assert_eq!(d.nnz_ratio, 1.0);
}
