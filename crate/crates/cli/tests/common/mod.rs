#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsify_core::{DenseMatrix, ScalarKind, C64};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsify"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "sparsify {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn kind_of(complex: bool) -> ScalarKind {
    if complex {
        ScalarKind::Complex
    } else {
        ScalarKind::Real
    }
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

pub fn random_rank(m: usize, n: usize, r: usize, kind: ScalarKind, rng: &mut ChaCha8Rng) -> DenseMatrix {
    random(m, r, kind, rng).matmul(&random(r, n, kind, rng))
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

pub const WORKED_EXAMPLE: &str = "%%MatrixMarket matrix array real general
3 4
5
-5
0
4
8
9
1
-7
-7
-5
7
-5
";
