//! Test matrices.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{DenseMatrix, ScalarKind, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMatrixKind {
    /// `A_ij = cos(3^(1/4) sqrt(i) j)^5` with 1-based indices.
    Paper40,
    /// Real random matrix of prescribed rank.
    RankDef,
    Hermitian,
    ComplexSym,
}

impl TestMatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            TestMatrixKind::Paper40 => "paper40",
            TestMatrixKind::RankDef => "rankdef",
            TestMatrixKind::Hermitian => "hermitian",
            TestMatrixKind::ComplexSym => "complexsym",
        }
    }
}

impl fmt::Display for TestMatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestMatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            TestMatrixKind::Paper40,
            TestMatrixKind::RankDef,
            TestMatrixKind::Hermitian,
            TestMatrixKind::ComplexSym,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::invalid(format!("unknown test matrix kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub n: usize,
    /// Column count for `rankdef`; defaults to `n`.
    pub cols: Option<usize>,
    /// Rank for `rankdef`; defaults to `max(1, min(m, n) − 2)`.
    pub rank: Option<usize>,
    pub seed: u64,
}

impl GenOptions {
    pub fn new(n: usize) -> Self {
        GenOptions { n, cols: None, rank: None, seed: 0 }
    }
}

/// `paper40` entry at 1-based `(i, j)`.
pub fn paper40_entry(i: usize, j: usize) -> f64 {
    (3f64.powf(0.25) * (i as f64).sqrt() * j as f64).cos().powi(5)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

fn random(rows: usize, cols: usize, kind: ScalarKind, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(rows, cols, kind);
    for j in 0..cols {
        for i in 0..rows {
            let re = uniform(rng);
            let im = if kind == ScalarKind::Complex { uniform(rng) } else { 0.0 };
            a[(i, j)] = C64::new(re, im);
        }
    }
    a
}

pub fn gen_test_matrix(kind: TestMatrixKind, opts: &GenOptions) -> Result<DenseMatrix> {
    let n = opts.n;
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    Ok(match kind {
        TestMatrixKind::Paper40 => {
            DenseMatrix::from_fn(n, n, ScalarKind::Real, |i, j| C64::new(paper40_entry(i + 1, j + 1), 0.0))
        }
        TestMatrixKind::RankDef => {
            let cols = opts.cols.unwrap_or(n);
            if cols == 0 {
                return Err(Error::invalid("cols must be >= 1"));
            }
            let rank = opts.rank.unwrap_or(n.min(cols).saturating_sub(2).max(1));
            if rank > n.min(cols) {
                return Err(Error::invalid(format!("rank {rank} exceeds min({n}, {cols})")));
            }
            let left = random(n, rank, ScalarKind::Real, &mut rng);
            let right = random(rank, cols, ScalarKind::Real, &mut rng);
            left.matmul(&right)
        }
        TestMatrixKind::Hermitian => {
            let b = random(n, n, ScalarKind::Complex, &mut rng);
            (&b + &b.adjoint()).scale(C64::new(0.5, 0.0))
        }
        TestMatrixKind::ComplexSym => {
            let b = random(n, n, ScalarKind::Complex, &mut rng);
            (&b + &b.transpose()).scale(C64::new(0.5, 0.0))
        }
    })
}
