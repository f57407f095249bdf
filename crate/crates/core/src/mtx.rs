//! Matrix Market reading and writing.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::csr::SparseMatrixCsr;
use crate::dense::{DenseMatrix, ScalarKind, C64};
use crate::error::{Error, Result};
use crate::pattern::SparsityPattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// A parsed file: shape, scalar kind and the stored entries after expanding
/// symmetric storage, in row-major order.
#[derive(Debug, Clone)]
pub struct MatrixMarket {
    pub rows: usize,
    pub cols: usize,
    pub kind: ScalarKind,
    pub entries: Vec<(usize, usize, C64)>,
}

impl MatrixMarket {
    pub fn to_dense(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.rows, self.cols, self.kind);
        for &(i, j, v) in &self.entries {
            a[(i, j)] = v;
        }
        a
    }

    /// Stored entries as CSR, explicit zeros kept.
    pub fn to_csr(&self) -> SparseMatrixCsr {
        let positions = self.entries.iter().map(|&(i, j, _)| (i, j)).collect();
        let pattern = SparsityPattern::new(self.rows, self.cols, positions).expect("entries are unique and in range");
        SparseMatrixCsr::from_pattern(&pattern, self.entries.iter().map(|e| e.2).collect(), self.kind)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_header(line: &str) -> Result<(Format, Field, Symmetry)> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = match words[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(parse_err(1, format!("unsupported format '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };
    if format == Format::Array && field == Field::Pattern {
        return Err(parse_err(1, "pattern field requires coordinate format"));
    }
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian symmetry requires the complex field"));
    }
    Ok((format, field, symmetry))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("invalid number '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn parse_value(toks: &[&str], field: Field, line: usize) -> Result<C64> {
    let want = match field {
        Field::Pattern => 0,
        Field::Real | Field::Integer => 1,
        Field::Complex => 2,
    };
    if toks.len() != want {
        return Err(parse_err(line, format!("expected {want} value field(s), found {}", toks.len())));
    }
    Ok(match field {
        Field::Pattern => C64::new(1.0, 0.0),
        Field::Real | Field::Integer => C64::new(parse_f64(toks[0], line)?, 0.0),
        Field::Complex => C64::new(parse_f64(toks[0], line)?, parse_f64(toks[1], line)?),
    })
}

fn mirror(v: C64, symmetry: Symmetry) -> C64 {
    match symmetry {
        Symmetry::General | Symmetry::Symmetric => v,
        Symmetry::SkewSymmetric => -v,
        Symmetry::Hermitian => v.conj(),
    }
}

/// Parses Matrix Market text.
pub fn parse_matrix_market(text: &str) -> Result<MatrixMarket> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (format, field, symmetry) = parse_header(header)?;
    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = data.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let size: Vec<&str> = size.split_whitespace().collect();
    let want = if format == Format::Array { 2 } else { 3 };
    if size.len() != want {
        return Err(parse_err(size_line, format!("size line needs {want} integers")));
    }
    let rows = parse_usize(size[0], size_line, "row count")?;
    let cols = parse_usize(size[1], size_line, "column count")?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_line, "matrix dimensions must be positive"));
    }
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }
    let kind = if field == Field::Complex { ScalarKind::Complex } else { ScalarKind::Real };

    let mut stored: Vec<(usize, usize, C64)> = Vec::new();
    let mut last_line = size_line;
    match format {
        Format::Array => {
            // column-major, lower triangle only for symmetric storage
            let mut slots = Vec::new();
            for j in 0..cols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                slots.extend((start..rows).map(|i| (i, j)));
            }
            let mut slots = slots.into_iter();
            for (line, l) in data {
                last_line = line;
                let toks: Vec<&str> = l.split_whitespace().collect();
                let (i, j) = slots.next().ok_or_else(|| parse_err(line, "more entries than the size line declares"))?;
                stored.push((i, j, parse_value(&toks, field, line)?));
            }
            if slots.next().is_some() {
                return Err(parse_err(last_line, "fewer entries than the size line declares"));
            }
        }
        Format::Coordinate => {
            let nnz = parse_usize(size[2], size_line, "entry count")?;
            for (line, l) in data {
                last_line = line;
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() < 2 {
                    return Err(parse_err(line, "expected 'row col [value]'"));
                }
                let i = parse_usize(toks[0], line, "row index")?;
                let j = parse_usize(toks[1], line, "column index")?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(parse_err(line, format!("index ({i}, {j}) out of bounds for {rows}x{cols}")));
                }
                let (i, j) = (i - 1, j - 1);
                if symmetry != Symmetry::General && j > i {
                    return Err(parse_err(line, "symmetric storage holds the lower triangle only"));
                }
                if symmetry == Symmetry::SkewSymmetric && i == j {
                    return Err(parse_err(line, "skew-symmetric storage has no diagonal"));
                }
                if stored.len() == nnz {
                    return Err(parse_err(line, "more entries than the size line declares"));
                }
                stored.push((i, j, parse_value(&toks[2..], field, line)?));
            }
            if stored.len() != nnz {
                return Err(parse_err(last_line, "fewer entries than the size line declares"));
            }
            let mut seen = std::collections::HashSet::with_capacity(stored.len());
            for (k, &(i, j, _)) in stored.iter().enumerate() {
                if !seen.insert((i, j)) {
                    return Err(parse_err(
                        entry_line(text, k),
                        format!("duplicate entry ({}, {})", i + 1, j + 1),
                    ));
                }
            }
        }
    }

    let mut entries = Vec::with_capacity(stored.len() * 2);
    for &(i, j, v) in &stored {
        entries.push((i, j, v));
        if symmetry != Symmetry::General && i != j {
            entries.push((j, i, mirror(v, symmetry)));
        }
    }
    entries.sort_by_key(|&(i, j, _)| (i, j));
    Ok(MatrixMarket { rows, cols, kind, entries })
}

/// Line number of the `k`-th data entry (0-based, after the size line).
fn entry_line(text: &str, k: usize) -> usize {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%')
        })
        .nth(k + 1)
        .map_or(0, |(n, _)| n + 1)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<MatrixMarket> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Reads a file as a dense matrix.
pub fn read_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    Ok(read_matrix_market(path)?.to_dense())
}

/// Reads a file as CSR; coordinate files keep explicit zeros, array files
/// keep nonzeros.
pub fn read_sparse(path: impl AsRef<Path>) -> Result<SparseMatrixCsr> {
    let text = fs::read_to_string(path)?;
    let mm = parse_matrix_market(&text)?;
    let array = text.lines().next().is_some_and(|h| h.to_ascii_lowercase().contains(" array "));
    Ok(if array { SparseMatrixCsr::from_dense(&mm.to_dense()) } else { mm.to_csr() })
}

fn push_value(out: &mut String, v: C64, kind: ScalarKind) {
    match kind {
        ScalarKind::Real => write!(out, "{:.16e}", v.re),
        ScalarKind::Complex => write!(out, "{:.16e} {:.16e}", v.re, v.im),
    }
    .unwrap();
}

fn field_name(kind: ScalarKind) -> &'static str {
    match kind {
        ScalarKind::Real => "real",
        ScalarKind::Complex => "complex",
    }
}

/// Dense matrix as an `array` file, column-major.
pub fn format_dense(a: &DenseMatrix) -> String {
    let mut out = format!("%%MatrixMarket matrix array {} general\n{} {}\n", field_name(a.kind()), a.nrows(), a.ncols());
    for &v in a.as_slice() {
        push_value(&mut out, v, a.kind());
        out.push('\n');
    }
    out
}

/// CSR matrix as a `coordinate` file sorted by (row, col), 1-based.
pub fn format_csr(x: &SparseMatrixCsr) -> String {
    let mut out = format!(
        "%%MatrixMarket matrix coordinate {} general\n{} {} {}\n",
        field_name(x.kind()),
        x.nrows(),
        x.ncols(),
        x.nnz()
    );
    for (i, j, v) in x.iter() {
        write!(out, "{} {} ", i + 1, j + 1).unwrap();
        push_value(&mut out, v, x.kind());
        out.push('\n');
    }
    out
}

/// Writes `contents` through a temporary file in the same directory, so a
/// failed write leaves no partial file behind.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("'{}' is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_dense(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    write_atomic(path, format_dense(a).as_bytes())
}

pub fn write_csr(path: impl AsRef<Path>, x: &SparseMatrixCsr) -> Result<()> {
    write_atomic(path, format_csr(x).as_bytes())
}
