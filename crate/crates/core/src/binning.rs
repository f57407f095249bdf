//! Bin identifiers: pattern entries with nearly equal values share one unknown.
//!
//! Binning runs independently on the real parts and, for complex input, the
//! imaginary parts. Within one part the values are split into sign classes
//! (negative, zero, positive) and each class is cut into `max_bins`
//! equal-width bins over the range of its magnitudes. Empty bins are dropped
//! and the rest are numbered consecutively, negative class first. Imaginary
//! identifiers start after the last real identifier.
//!
//! Binning magnitudes (rather than signed values) makes the negative class
//! the exact mirror of the positive one, so `B(-A)`, `B(A*)` and the
//! Hermitian/skew-Hermitian cases induce the same partition bit for bit.

use crate::dense::{DenseMatrix, ScalarKind};
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

/// Which scalar part of an entry an unknown stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Real,
    Imag,
}

/// One real optimization coordinate: a pattern entry and a part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unknown {
    /// Index into `pattern.positions()`.
    pub entry: usize,
    pub part: Part,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinAssignment {
    pattern: SparsityPattern,
    kind: ScalarKind,
    /// 1-based bin id of each entry's real part.
    real_ids: Vec<usize>,
    /// 1-based bin id of each entry's imaginary part, complex input only.
    imag_ids: Option<Vec<usize>>,
    n_real_bins: usize,
    n_bins: usize,
    members: Vec<Vec<Unknown>>,
}

impl BinAssignment {
    /// Assembles an assignment from explicit ids, validating that they are
    /// dense (every id in `1..=n` used) and that imaginary ids follow the
    /// real ones.
    pub fn from_ids(
        pattern: SparsityPattern,
        real_ids: Vec<usize>,
        imag_ids: Option<Vec<usize>>,
    ) -> Result<Self> {
        let nnz = pattern.nnz();
        if real_ids.len() != nnz || imag_ids.as_ref().is_some_and(|v| v.len() != nnz) {
            return Err(Error::invalid("bin id count does not match the pattern"));
        }
        let n_real_bins = real_ids.iter().copied().max().unwrap_or(0);
        let n_bins = imag_ids
            .as_ref()
            .and_then(|v| v.iter().copied().max())
            .unwrap_or(n_real_bins);

        let mut members = vec![Vec::new(); n_bins];
        let mut place = |id: usize, u: Unknown, lo: usize, hi: usize| -> Result<()> {
            if id < lo || id > hi {
                return Err(Error::invalid(format!("bin id {id} outside {lo}..={hi}")));
            }
            members[id - 1].push(u);
            Ok(())
        };
        for (entry, &id) in real_ids.iter().enumerate() {
            place(id, Unknown { entry, part: Part::Real }, 1, n_real_bins)?;
        }
        if let Some(ids) = &imag_ids {
            for (entry, &id) in ids.iter().enumerate() {
                place(id, Unknown { entry, part: Part::Imag }, n_real_bins + 1, n_bins)?;
            }
        }
        if members.iter().any(Vec::is_empty) {
            return Err(Error::invalid("bin ids are not dense"));
        }
        let kind = if imag_ids.is_some() {
            ScalarKind::Complex
        } else {
            ScalarKind::Real
        };
        Ok(BinAssignment {
            pattern,
            kind,
            real_ids,
            imag_ids,
            n_real_bins,
            n_bins,
            members,
        })
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn kind(&self) -> ScalarKind {
        self.kind
    }

    pub fn real_ids(&self) -> &[usize] {
        &self.real_ids
    }

    pub fn imag_ids(&self) -> Option<&[usize]> {
        self.imag_ids.as_deref()
    }

    pub fn n_real_bins(&self) -> usize {
        self.n_real_bins
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Number of real optimization coordinates before binning.
    pub fn n_unknowns(&self) -> usize {
        self.pattern.nnz() * self.kind.parts()
    }

    /// Unknowns constrained to share bin `b` (0-based).
    pub fn members(&self, b: usize) -> &[Unknown] {
        &self.members[b]
    }

    /// 0-based bin index of an unknown.
    pub fn bin_of(&self, u: Unknown) -> usize {
        match u.part {
            Part::Real => self.real_ids[u.entry] - 1,
            Part::Imag => {
                self.imag_ids.as_ref().expect("imaginary part of a real assignment")[u.entry] - 1
            }
        }
    }

    /// Bin-id matrices (0 outside the pattern), real part then imaginary part.
    pub fn id_matrices(&self) -> (Vec<Vec<usize>>, Option<Vec<Vec<usize>>>) {
        let (m, n) = self.pattern.shape();
        let fill = |ids: &[usize]| {
            let mut out = vec![vec![0; n]; m];
            for (&(i, j), &id) in self.pattern.positions().iter().zip(ids) {
                out[i][j] = id;
            }
            out
        };
        (fill(&self.real_ids), self.imag_ids.as_deref().map(fill))
    }

    /// Bin assignment of the transposed matrix with the same partition.
    pub fn transpose(&self) -> BinAssignment {
        let pattern = self.pattern.transpose();
        let remap = |ids: &[usize]| -> Vec<usize> {
            pattern
                .positions()
                .iter()
                .map(|&(j, i)| ids[self.pattern.index_of(i, j).expect("transposed position")])
                .collect()
        };
        let real_ids = remap(&self.real_ids);
        let imag_ids = self.imag_ids.as_deref().map(remap);
        BinAssignment::from_ids(pattern, real_ids, imag_ids).expect("transpose keeps ids dense")
    }
}

/// Assigns bins to the pattern entries of `a`. `max_bins = 0` gives every
/// unknown its own bin.
pub fn compute_bins(
    a: &DenseMatrix,
    pattern: &SparsityPattern,
    max_bins: usize,
) -> Result<BinAssignment> {
    if a.shape() != pattern.shape() {
        return Err(Error::invalid(format!(
            "pattern is {:?} but the matrix is {:?}",
            pattern.shape(),
            a.shape()
        )));
    }
    a.ensure_finite()?;
    let values = |f: fn(num_complex::Complex64) -> f64| -> Vec<f64> {
        pattern.positions().iter().map(|&(i, j)| f(a[(i, j)])).collect()
    };
    let (mut real_ids, n_real) = bin_part(&values(|v| v.re), max_bins);
    for id in &mut real_ids {
        *id += 1;
    }
    let imag_ids = a.is_complex().then(|| {
        let (ids, _) = bin_part(&values(|v| v.im), max_bins);
        ids.into_iter().map(|id| id + n_real + 1).collect()
    });
    BinAssignment::from_ids(pattern.clone(), real_ids, imag_ids)
}

/// Dense 0-based bin ids for one scalar part, and the bin count.
fn bin_part(values: &[f64], max_bins: usize) -> (Vec<usize>, usize) {
    if max_bins == 0 {
        return ((0..values.len()).collect(), values.len());
    }
    let mut ids = vec![0; values.len()];
    let mut next = 0;
    let classes: [fn(f64) -> bool; 3] = [|v| v < 0.0, |v| v == 0.0, |v| v > 0.0];
    for in_class in classes {
        let members: Vec<usize> = (0..values.len()).filter(|&k| in_class(values[k])).collect();
        if members.is_empty() {
            continue;
        }
        let mags: Vec<f64> = members.iter().map(|&k| values[k].abs()).collect();
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<usize> = if lo == hi {
            vec![0; mags.len()]
        } else {
            let width = (hi - lo) / max_bins as f64;
            mags.iter()
                .map(|&v| (((v - lo) / width).floor() as usize).min(max_bins - 1))
                .collect()
        };
        let mut used = raw.clone();
        used.sort_unstable();
        used.dedup();
        for (&k, r) in members.iter().zip(&raw) {
            ids[k] = next + used.binary_search(r).expect("raw id present");
        }
        next += used.len();
    }
    (ids, next)
}

/// True iff the two assignments induce the same partition of the matrix
/// positions, part by part (0 outside the pattern counts as a class).
pub fn bins_equivalent(b1: &BinAssignment, b2: &BinAssignment) -> Result<bool> {
    if b1.pattern.shape() != b2.pattern.shape() {
        return Err(Error::invalid("bin assignments have different sizes"));
    }
    let (r1, i1) = b1.id_matrices();
    let (r2, i2) = b2.id_matrices();
    let zeros = || vec![vec![0; b1.pattern.ncols()]; b1.pattern.nrows()];
    let i1 = i1.unwrap_or_else(zeros);
    let i2 = i2.unwrap_or_else(zeros);
    Ok(canonical(&r1) == canonical(&r2) && canonical(&i1) == canonical(&i2))
}

/// Relabels ids by order of first occurrence in a row-major scan.
fn canonical(ids: &[Vec<usize>]) -> Vec<usize> {
    let mut seen = std::collections::HashMap::new();
    ids.iter()
        .flatten()
        .map(|&id| {
            let next = seen.len();
            *seen.entry(id).or_insert(next)
        })
        .collect()
}

/// Bin index (0-based) of every real unknown: real parts of all entries in
/// pattern order, then imaginary parts. This is the column index of the
/// single one in each row of the indicator matrix `E`.
pub fn reduction_map(b: &BinAssignment) -> Vec<usize> {
    let mut map: Vec<usize> = b.real_ids.iter().map(|id| id - 1).collect();
    if let Some(ids) = &b.imag_ids {
        map.extend(ids.iter().map(|id| id - 1));
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::C64;

    fn ids(b: &BinAssignment) -> Vec<Vec<usize>> {
        b.id_matrices().0
    }

    #[test]
    fn positive_class_uniform_bins() {
        let a = DenseMatrix::from_real_rows(&[&[1.0, 2.0], &[2.04, 100.0]]);
        let b = compute_bins(&a, &SparsityPattern::full(2, 2), 50).unwrap();
        assert_eq!(ids(&b), vec![vec![1, 1], vec![1, 2]]);
        assert_eq!(b.n_bins(), 2);
        assert_eq!(reduction_map(&b), vec![0, 0, 0, 1]);
    }

    #[test]
    fn zero_max_bins_gives_singletons() {
        let a = DenseMatrix::from_fn(2, 3, ScalarKind::Complex, |i, j| {
            C64::new(i as f64 + 1.0, j as f64 - 1.0)
        });
        let pat = SparsityPattern::full(2, 3);
        let b = compute_bins(&a, &pat, 0).unwrap();
        assert_eq!(b.n_bins(), 12);
        assert_eq!(reduction_map(&b), (0..12).collect::<Vec<_>>());
        let real = a.clone().with_kind(ScalarKind::Real);
        assert_eq!(compute_bins(&real, &pat, 0).unwrap().n_bins(), 6);
    }

    #[test]
    fn scaled_identity_is_one_bin() {
        let a = DenseMatrix::identity(4).scale(C64::new(-2.5, 0.0));
        let pat = SparsityPattern::new(4, 4, (0..4).map(|i| (i, i)).collect()).unwrap();
        let b = compute_bins(&a, &pat, 16).unwrap();
        assert_eq!(b.n_bins(), 1);
        assert_eq!(reduction_map(&b), vec![0; 4]);
    }

    #[test]
    fn sign_classes_and_zero_class() {
        let a = DenseMatrix::from_real_rows(&[&[-3.0, 0.0, 2.0], &[-1.0, 0.0, 5.0]]);
        let b = compute_bins(&a, &SparsityPattern::full(2, 3), 1).unwrap();
        // one bin per nonempty class: negative, zero, positive
        assert_eq!(ids(&b), vec![vec![1, 2, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn imaginary_ids_follow_real_ids() {
        let a = DenseMatrix::from_fn(1, 2, ScalarKind::Complex, |_, j| {
            C64::new(1.0, if j == 0 { -1.0 } else { 1.0 })
        });
        let b = compute_bins(&a, &SparsityPattern::full(1, 2), 4).unwrap();
        assert_eq!(b.real_ids(), &[1, 1]);
        assert_eq!(b.imag_ids().unwrap(), &[2, 3]);
        assert_eq!(b.n_real_bins(), 1);
        assert_eq!(b.n_bins(), 3);
        assert_eq!(b.n_unknowns(), 4);
    }

    #[test]
    fn equivalence_by_relabeling() {
        let pat = SparsityPattern::new(2, 2, vec![(0, 0), (0, 1), (1, 0)]).unwrap();
        let b1 = BinAssignment::from_ids(pat.clone(), vec![1, 1, 2], None).unwrap();
        let b2 = BinAssignment::from_ids(pat.clone(), vec![2, 2, 1], None).unwrap();
        let b3 = BinAssignment::from_ids(pat, vec![1, 2, 2], None).unwrap();
        assert!(bins_equivalent(&b1, &b1).unwrap());
        assert!(bins_equivalent(&b1, &b2).unwrap());
        assert!(!bins_equivalent(&b1, &b3).unwrap());
        let other = BinAssignment::from_ids(SparsityPattern::full(1, 1), vec![1], None).unwrap();
        assert!(bins_equivalent(&b1, &other).is_err());
    }

    #[test]
    fn rejects_sparse_ids_and_mismatched_shapes() {
        let pat = SparsityPattern::full(1, 2);
        assert!(BinAssignment::from_ids(pat.clone(), vec![1, 3], None).is_err());
        let a = DenseMatrix::identity(3);
        assert!(compute_bins(&a, &pat, 4).is_err());
    }
}
