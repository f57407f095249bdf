use crate::dense::{DenseMatrix, ScalarKind, C64};
use crate::pattern::SparsityPattern;

/// Compressed sparse row matrix. Column ids are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixCsr {
    num_rows: usize,
    num_cols: usize,
    row_offsets: Vec<usize>,
    column_ids: Vec<usize>,
    values: Vec<C64>,
    kind: ScalarKind,
}

impl SparseMatrixCsr {
    /// Values are given in pattern order (row-major).
    pub fn from_pattern(pattern: &SparsityPattern, values: Vec<C64>, kind: ScalarKind) -> Self {
        assert_eq!(pattern.nnz(), values.len(), "one value per pattern entry");
        let values = match kind {
            ScalarKind::Real => values.into_iter().map(|v| C64::new(v.re, 0.0)).collect(),
            ScalarKind::Complex => values,
        };
        SparseMatrixCsr {
            num_rows: pattern.nrows(),
            num_cols: pattern.ncols(),
            row_offsets: pattern.row_offsets().to_vec(),
            column_ids: pattern.positions().iter().map(|&(_, j)| j).collect(),
            values,
            kind,
        }
    }

    /// Entries of `a` at the pattern positions, explicit zeros included.
    pub fn from_dense_on(a: &DenseMatrix, pattern: &SparsityPattern) -> Self {
        let values = pattern.positions().iter().map(|&(i, j)| a[(i, j)]).collect();
        Self::from_pattern(pattern, values, a.kind())
    }

    /// Nonzero entries of `a`.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        Self::from_dense_on(a, &SparsityPattern::nonzeros_of(a))
    }

    pub fn zeros(num_rows: usize, num_cols: usize, kind: ScalarKind) -> Self {
        Self::from_pattern(&SparsityPattern::empty(num_rows, num_cols), Vec::new(), kind)
    }

    pub fn nrows(&self) -> usize {
        self.num_rows
    }

    pub fn ncols(&self) -> usize {
        self.num_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.num_rows, self.num_cols)
    }

    pub fn kind(&self) -> ScalarKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn column_ids(&self) -> &[usize] {
        &self.column_ids
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.num_rows).flat_map(move |i| {
            (self.row_offsets[i]..self.row_offsets[i + 1])
                .map(move |k| (i, self.column_ids[k], self.values[k]))
        })
    }

    pub fn pattern(&self) -> SparsityPattern {
        let positions = self.iter().map(|(i, j, _)| (i, j)).collect();
        SparsityPattern::new(self.num_rows, self.num_cols, positions).expect("CSR structure is valid")
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.column_ids[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.num_rows, self.num_cols, self.kind);
        for (i, j, v) in self.iter() {
            out[(i, j)] = v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |s, v| s + v.norm_sqr()).sqrt()
    }

    fn map_positions(
        &self,
        (rows, cols): (usize, usize),
        f: impl Fn(usize, usize, C64) -> (usize, usize, C64),
    ) -> Self {
        let mut entries: Vec<(usize, usize, C64)> = self.iter().map(|(i, j, v)| f(i, j, v)).collect();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        let pattern =
            SparsityPattern::new(rows, cols, entries.iter().map(|&(i, j, _)| (i, j)).collect())
                .expect("mapped positions are valid");
        Self::from_pattern(&pattern, entries.into_iter().map(|e| e.2).collect(), self.kind)
    }

    pub fn transpose(&self) -> Self {
        self.map_positions((self.num_cols, self.num_rows), |i, j, v| (j, i, v))
    }

    pub fn adjoint(&self) -> Self {
        self.map_positions((self.num_cols, self.num_rows), |i, j, v| (j, i, v.conj()))
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut out = self.clone();
        if alpha.im != 0.0 {
            out.kind = ScalarKind::Complex;
        }
        for v in &mut out.values {
            *v *= alpha;
        }
        out
    }

    /// Real values, or `None` for a complex matrix.
    pub fn real_values(&self) -> Option<Vec<f64>> {
        (self.kind == ScalarKind::Real).then(|| self.values.iter().map(|v| v.re).collect())
    }
}
