//! Matrix Market reader and writer.
//!
//! Reads `coordinate` and `array` storage with `real`, `integer` or
//! `complex` fields and `general`, `symmetric`, `skew-symmetric` or
//! `hermitian` symmetry. Symmetric variants are expanded to full storage.
//! Writing uses `array` for dense and `coordinate` for sparse matrices, with
//! `real` whenever every imaginary part is zero. Floats are printed with the
//! shortest round-trip representation, so write-then-read is bit exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dynspec_core::{DenseMatrix, Matrix, SparseMatrix, C64};

#[derive(Debug, thiserror::Error)]
pub enum MtxError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: entry ({i}, {j}) outside a {rows}x{cols} matrix")]
    OutOfBounds {
        line: usize,
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} entries, found {found}")]
    Count { expected: usize, found: usize },
    #[error("symmetric storage requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

impl Symmetry {
    fn mirror(self, v: C64) -> C64 {
        match self {
            Symmetry::General | Symmetry::Symmetric => v,
            Symmetry::SkewSymmetric => -v,
            Symmetry::Hermitian => v.conj(),
        }
    }
}

fn parse_header(line: &str) -> Result<(Format, Field, Symmetry), MtxError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(MtxError::Header(line.to_string()));
    }
    let format = match words[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(MtxError::Header(format!("unsupported format `{other}`"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(MtxError::Header(format!("unsupported field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(MtxError::Header(format!("unsupported symmetry `{other}`"))),
    };
    if field == Field::Real && symmetry == Symmetry::Hermitian {
        return Err(MtxError::Header("hermitian requires a complex field".into()));
    }
    Ok((format, field, symmetry))
}

fn number<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MtxError> {
    let tok = tok.ok_or_else(|| MtxError::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| MtxError::Parse {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

fn value<'a>(toks: &mut impl Iterator<Item = &'a str>, field: Field, line: usize) -> Result<C64, MtxError> {
    let re: f64 = number(toks.next(), line, "real part")?;
    let im = match field {
        Field::Real => 0.0,
        Field::Complex => number(toks.next(), line, "imaginary part")?,
    };
    Ok(C64::new(re, im))
}

/// Parses Matrix Market text. Coordinate files give a sparse matrix (with
/// duplicate entries summed), array files a dense one.
pub fn parse_matrix_market(text: &str) -> Result<Matrix, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| MtxError::Header("empty file".into()))?;
    let (format, field, symmetry) = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| MtxError::Header("missing size line".into()))?;
    let mut toks = size.split_whitespace();
    let rows: usize = number(toks.next(), size_line, "row count")?;
    let cols: usize = number(toks.next(), size_line, "column count")?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(MtxError::NotSquare { rows, cols });
    }
    match format {
        Format::Coordinate => {
            let nnz: usize = number(toks.next(), size_line, "entry count")?;
            let mut triplets = Vec::with_capacity(nnz);
            let mut found = 0;
            for (line, l) in body {
                let mut toks = l.split_whitespace();
                let i: usize = number(toks.next(), line, "row index")?;
                let j: usize = number(toks.next(), line, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(MtxError::OutOfBounds { line, i, j, rows, cols });
                }
                let v = value(&mut toks, field, line)?;
                found += 1;
                triplets.push((i - 1, j - 1, v));
                if symmetry != Symmetry::General && i != j {
                    triplets.push((j - 1, i - 1, symmetry.mirror(v)));
                }
            }
            if found != nnz {
                return Err(MtxError::Count { expected: nnz, found });
            }
            let m = SparseMatrix::from_triplets(rows, cols, triplets).map_err(|e| MtxError::Parse {
                line: size_line,
                msg: e.to_string(),
            })?;
            Ok(Matrix::Sparse(m))
        }
        Format::Array => {
            let mut m = DenseMatrix::zeros(rows, cols);
            // column-major; symmetric variants store the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::SkewSymmetric => j + 1,
                        _ => j,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut found = 0;
            for (line, l) in body {
                let mut toks = l.split_whitespace();
                let v = value(&mut toks, field, line)?;
                let &(i, j) = positions.get(found).ok_or(MtxError::Count {
                    expected: positions.len(),
                    found: found + 1,
                })?;
                m[(i, j)] = v;
                if symmetry != Symmetry::General && i != j {
                    m[(j, i)] = symmetry.mirror(v);
                }
                found += 1;
            }
            if found != positions.len() {
                return Err(MtxError::Count {
                    expected: positions.len(),
                    found,
                });
            }
            Ok(Matrix::Dense(m))
        }
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Matrix, MtxError> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

fn push_value(out: &mut String, v: C64, field: Field) {
    match field {
        Field::Real => {
            let _ = writeln!(out, "{:?}", v.re);
        }
        Field::Complex => {
            let _ = writeln!(out, "{:?} {:?}", v.re, v.im);
        }
    }
}

/// Formats a matrix in `general` symmetry.
pub fn format_matrix_market(m: &Matrix) -> String {
    let mut out = String::new();
    match m {
        Matrix::Dense(d) => {
            let field = if d.data().iter().all(|v| v.im == 0.0) {
                Field::Real
            } else {
                Field::Complex
            };
            let name = if field == Field::Real { "real" } else { "complex" };
            let _ = writeln!(out, "%%MatrixMarket matrix array {name} general");
            let _ = writeln!(out, "{} {}", d.rows(), d.cols());
            for j in 0..d.cols() {
                for i in 0..d.rows() {
                    push_value(&mut out, d[(i, j)], field);
                }
            }
        }
        Matrix::Sparse(s) => {
            let field = if s.values().iter().all(|v| v.im == 0.0) {
                Field::Real
            } else {
                Field::Complex
            };
            let name = if field == Field::Real { "real" } else { "complex" };
            let _ = writeln!(out, "%%MatrixMarket matrix coordinate {name} general");
            let _ = writeln!(out, "{} {} {}", s.rows(), s.cols(), s.nnz());
            for (i, j, v) in s.triplets() {
                let _ = write!(out, "{} {} ", i + 1, j + 1);
                push_value(&mut out, v, field);
            }
        }
    }
    out
}

pub fn write_matrix_market(m: &Matrix, path: impl AsRef<Path>) -> Result<(), MtxError> {
    fs::write(path, format_matrix_market(m))?;
    Ok(())
}

/// Diagonal entries for a `D` file: an `N×1` or `1×N` file is read as the
/// diagonal itself, a square file contributes its diagonal.
pub fn diagonal_from(m: &Matrix) -> Result<Vec<C64>, MtxError> {
    match m.shape() {
        (n, 1) => Ok((0..n).map(|i| m.get(i, 0)).collect()),
        (1, n) => Ok((0..n).map(|j| m.get(0, j)).collect()),
        (r, c) if r == c => Ok(m.diagonal()),
        (rows, cols) => Err(MtxError::NotSquare { rows, cols }),
    }
}
