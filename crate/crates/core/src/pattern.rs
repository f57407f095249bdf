//! Sparsity patterns and the row/column L_p-norm selection rule.

use std::cmp::Ordering;
use std::ops::Range;

use crate::dense::{DenseMatrix, ScalarKind, C64};
use crate::error::{Error, Result};

/// Set of retained positions, stored row-major with a column index on the side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    rows: usize,
    cols: usize,
    positions: Vec<(usize, usize)>,
    row_offsets: Vec<usize>,
    /// For each column, indices into `positions` in increasing row order.
    col_entries: Vec<Vec<usize>>,
}

impl SparsityPattern {
    /// Builds a pattern from positions in any order. Duplicates and
    /// out-of-range positions are rejected.
    pub fn new(rows: usize, cols: usize, mut positions: Vec<(usize, usize)>) -> Result<Self> {
        positions.sort_unstable();
        for w in positions.windows(2) {
            if w[0] == w[1] {
                return Err(Error::invalid(format!(
                    "duplicate pattern position ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        if let Some(&(i, j)) = positions.iter().find(|&&(i, j)| i >= rows || j >= cols) {
            return Err(Error::invalid(format!(
                "pattern position ({i}, {j}) outside a {rows}x{cols} matrix"
            )));
        }
        let mut row_offsets = vec![0; rows + 1];
        let mut col_entries = vec![Vec::new(); cols];
        for (k, &(i, j)) in positions.iter().enumerate() {
            row_offsets[i + 1] += 1;
            col_entries[j].push(k);
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparsityPattern {
            rows,
            cols,
            positions,
            row_offsets,
            col_entries,
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, Vec::new()).expect("empty pattern is valid")
    }

    /// Every position of a `rows x cols` matrix.
    pub fn full(rows: usize, cols: usize) -> Self {
        let positions = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).collect();
        Self::new(rows, cols, positions).expect("full pattern is valid")
    }

    /// Positions of the nonzero entries of `a`.
    pub fn nonzeros_of(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        let positions = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| a[(i, j)] != C64::new(0.0, 0.0))
            .collect();
        Self::new(m, n, positions).expect("nonzero positions are valid")
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions sorted by row, then column.
    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    /// Indices into [`positions`](Self::positions) for row `i`.
    pub fn row_range(&self, i: usize) -> Range<usize> {
        self.row_offsets[i]..self.row_offsets[i + 1]
    }

    /// Indices into [`positions`](Self::positions) for column `j`.
    pub fn col_entries(&self, j: usize) -> &[usize] {
        &self.col_entries[j]
    }

    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.rows {
            return None;
        }
        let range = self.row_range(i);
        self.positions[range.clone()]
            .binary_search_by(|&(_, c)| c.cmp(&j))
            .ok()
            .map(|k| range.start + k)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.index_of(i, j).is_some()
    }

    pub fn transpose(&self) -> Self {
        let positions = self.positions.iter().map(|&(i, j)| (j, i)).collect();
        Self::new(self.cols, self.rows, positions).expect("transpose of a valid pattern")
    }

    pub fn is_subset_of(&self, other: &SparsityPattern) -> bool {
        self.shape() == other.shape() && self.positions.iter().all(|&(i, j)| other.contains(i, j))
    }

    /// 0/1 mask with ones at the retained positions.
    pub fn to_mask(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols, ScalarKind::Real);
        for &(i, j) in &self.positions {
            m[(i, j)] = C64::new(1.0, 0.0);
        }
        m
    }
}

/// Pattern from a 0/1 mask.
pub fn pattern_from_mask(mask: &DenseMatrix) -> Result<SparsityPattern> {
    let (m, n) = mask.shape();
    let mut positions = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let v = mask[(i, j)];
            if v.im != 0.0 || (v.re != 0.0 && v.re != 1.0) {
                return Err(Error::invalid(format!(
                    "mask entry ({i}, {j}) = {v} is not 0 or 1"
                )));
            }
            if v.re == 1.0 {
                positions.push((i, j));
            }
        }
    }
    SparsityPattern::new(m, n, positions)
}

/// Row/column L_p-norm pattern.
///
/// Each row keeps the shortest prefix of its entries, sorted by decreasing
/// magnitude, whose `sum |v|^p` reaches `ratio^p` times the full row sum,
/// plus every entry tied in magnitude with the last one kept. Columns are
/// treated the same way and the result is the union. Exact zeros are never
/// kept. `p = 0` keeps `ceil(ratio * nnz)` entries per line and `p = inf`
/// keeps each line's maximum.
pub fn lp_pattern(a: &DenseMatrix, ratio: f64, p: f64) -> Result<SparsityPattern> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::invalid(format!("sparsity ratio {ratio} outside [0, 1]")));
    }
    if !(p >= 0.0) {
        return Err(Error::invalid(format!("norm power p = {p} must be in [0, inf]")));
    }
    a.ensure_finite()?;
    let (m, n) = a.shape();
    let mut positions = Vec::new();
    let mut line = Vec::new();

    for i in 0..m {
        line.clear();
        line.extend((0..n).map(|j| (a[(i, j)].norm(), j)));
        positions.extend(select_line(&mut line, ratio, p).into_iter().map(|j| (i, j)));
    }
    for j in 0..n {
        line.clear();
        line.extend((0..m).map(|i| (a[(i, j)].norm(), i)));
        positions.extend(select_line(&mut line, ratio, p).into_iter().map(|i| (i, j)));
    }
    positions.sort_unstable();
    positions.dedup();
    SparsityPattern::new(m, n, positions)
}

/// Indices kept from one row or column given `(magnitude, index)` pairs.
fn select_line(line: &mut Vec<(f64, usize)>, ratio: f64, p: f64) -> Vec<usize> {
    line.retain(|&(mag, _)| mag > 0.0);
    if ratio == 0.0 || line.is_empty() {
        return Vec::new();
    }
    line.sort_by(|x, y| match y.0.partial_cmp(&x.0) {
        Some(Ordering::Equal) | None => x.1.cmp(&y.1),
        Some(o) => o,
    });

    let prefix = if p.is_infinite() {
        1
    } else if ratio == 1.0 {
        line.len()
    } else if p == 0.0 {
        // guard against ratio * count landing a rounding error above an integer
        let target = (ratio * line.len() as f64 * (1.0 - 4.0 * f64::EPSILON)).ceil() as usize;
        target.clamp(1, line.len())
    } else {
        let powered: Vec<f64> = line.iter().map(|&(mag, _)| mag.powf(p)).collect();
        let total: f64 = powered.iter().sum();
        let threshold = ratio.powf(p) * total;
        let mut acc = 0.0;
        let mut count = line.len();
        for (k, v) in powered.iter().enumerate() {
            acc += v;
            if acc >= threshold {
                count = k + 1;
                break;
            }
        }
        count
    };

    let last = line[prefix - 1].0;
    line.iter()
        .enumerate()
        .take_while(|&(k, &(mag, _))| k < prefix || mag == last)
        .map(|(_, &(_, idx))| idx)
        .collect()
}
