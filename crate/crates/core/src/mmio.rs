//! Matrix Market reading and writing.
//!
//! Matrices are read from the `coordinate` format with `real` or `integer`
//! fields and `general`, `symmetric` or `skew-symmetric` symmetry. Vectors
//! use the `array` format (a coordinate `n x 1` file is accepted too).
//! Values are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::sparse::CsrMatrix;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported Matrix Market field '{0}' (only real and integer are accepted)")]
    NonReal(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

struct Header {
    layout: Layout,
    symmetry: Symmetry,
}

fn parse_err(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<Header, MmError> {
    let fields: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match fields[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unknown layout '{other}'"))),
    };
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(MmError::NonReal(other.to_string())),
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok(Header { layout, symmetry })
}

/// Non-comment data lines with their 1-based line numbers.
struct DataLines {
    header: Header,
    lines: Vec<(usize, String)>,
}

fn read_lines(path: &Path) -> Result<DataLines, MmError> {
    let io = |source| MmError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut lines = BufReader::new(file).lines();
    let first = match lines.next() {
        Some(l) => l.map_err(io)?,
        None => return Err(parse_err(1, "empty file")),
    };
    let header = parse_header(&first)?;
    let mut data = Vec::new();
    for (i, l) in lines.enumerate() {
        let l = l.map_err(io)?;
        let trimmed = l.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        data.push((i + 2, trimmed.to_string()));
    }
    Ok(DataLines { header, lines: data })
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MmError> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

/// Reads a square sparse matrix in coordinate format.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<CsrMatrix, MmError> {
    let DataLines { header, lines } = read_lines(path.as_ref())?;
    if header.layout != Layout::Coordinate {
        return Err(parse_err(1, "matrices must use the coordinate layout"));
    }
    let mut it = lines.into_iter();
    let (size_line, size) = it.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows: usize = parse_num(tok.next(), size_line, "row count")?;
    let cols: usize = parse_num(tok.next(), size_line, "column count")?;
    let nnz: usize = parse_num(tok.next(), size_line, "entry count")?;
    if rows != cols {
        return Err(MmError::NotSquare { rows, cols });
    }
    let mut trip = Vec::with_capacity(nnz * 2);
    let mut count = 0;
    for (line, text) in it {
        let mut tok = text.split_whitespace();
        let i: usize = parse_num(tok.next(), line, "row index")?;
        let j: usize = parse_num(tok.next(), line, "column index")?;
        let v: f64 = parse_num(tok.next(), line, "value")?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(line, format!("index ({i}, {j}) outside {rows}x{cols}")));
        }
        let (i, j) = (i - 1, j - 1);
        trip.push((i, j, v));
        if i != j {
            match header.symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => trip.push((j, i, v)),
                Symmetry::SkewSymmetric => trip.push((j, i, -v)),
            }
        }
        count += 1;
    }
    if count != nnz {
        return Err(MmError::DimensionMismatch {
            expected: nnz,
            found: count,
        });
    }
    CsrMatrix::from_triplets(rows, &trip).map_err(|e| parse_err(0, e.to_string()))
}

/// Reads a dense vector (array `n x 1`, or coordinate `n x 1`).
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>, MmError> {
    let DataLines { header, lines } = read_lines(path.as_ref())?;
    let mut it = lines.into_iter();
    let (size_line, size) = it.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let mut tok = size.split_whitespace();
    let rows: usize = parse_num(tok.next(), size_line, "row count")?;
    let cols: usize = parse_num(tok.next(), size_line, "column count")?;
    if cols != 1 {
        return Err(parse_err(size_line, format!("vector must have one column, got {cols}")));
    }
    match header.layout {
        Layout::Array => {
            let values: Vec<f64> = it
                .map(|(line, text)| parse_num(Some(text.as_str()), line, "value"))
                .collect::<Result<_, _>>()?;
            if values.len() != rows {
                return Err(MmError::DimensionMismatch {
                    expected: rows,
                    found: values.len(),
                });
            }
            Ok(values)
        }
        Layout::Coordinate => {
            let nnz: usize = parse_num(tok.next(), size_line, "entry count")?;
            let mut v = vec![0.0; rows];
            let mut count = 0;
            for (line, text) in it {
                let mut tok = text.split_whitespace();
                let i: usize = parse_num(tok.next(), line, "row index")?;
                let _j: usize = parse_num(tok.next(), line, "column index")?;
                let x: f64 = parse_num(tok.next(), line, "value")?;
                if i == 0 || i > rows {
                    return Err(parse_err(line, format!("row index {i} outside 1..={rows}")));
                }
                v[i - 1] += x;
                count += 1;
            }
            if count != nnz {
                return Err(MmError::DimensionMismatch {
                    expected: nnz,
                    found: count,
                });
            }
            Ok(v)
        }
    }
}

/// Formats a value with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<(), MmError> {
    let path = path.as_ref();
    let io = |source| MmError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "%%MatrixMarket matrix array real general").map_err(io)?;
    writeln!(w, "{} 1", v.len()).map_err(io)?;
    for x in v {
        writeln!(w, "{}", format_f64(*x)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_matrix(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<(), MmError> {
    let path = path.as_ref();
    let io = |source| MmError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io)?;
    writeln!(w, "{} {} {}", a.n(), a.n(), a.nnz()).map_err(io)?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {}", i + 1, j + 1, format_f64(v)).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::LinearOperator;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn identity_matrix() {
        let f = temp_file("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 1.0\n");
        let a = read_matrix(f.path()).unwrap();
        assert_eq!(a.apply_vec(&[3.0, -4.0]), vec![3.0, -4.0]);
    }

    #[test]
    fn symmetric_lower_triangle_is_expanded() {
        let f = temp_file(
            "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2.0\n2 1 -1.0\n3 2 0.5\n3 3 4.0\n",
        );
        let a = read_matrix(f.path()).unwrap();
        // dense expansion by hand
        let dense = [[2.0, -1.0, 0.0], [-1.0, 0.0, 0.5], [0.0, 0.5, 4.0]];
        let x = [1.0, 2.0, 3.0];
        let want: Vec<f64> = dense.iter().map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        assert_eq!(a.apply_vec(&x), want);
    }

    #[test]
    fn malformed_header_names_line_one() {
        let f = temp_file("%%MatrixMarket tensor coordinate real general\n1 1 1\n1 1 1\n");
        match read_matrix(f.path()) {
            Err(MmError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn complex_field_rejected() {
        let f = temp_file("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
        assert!(matches!(read_matrix(f.path()), Err(MmError::NonReal(_))));
    }

    #[test]
    fn bad_entry_reports_its_line() {
        let f = temp_file("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 x 1.0\n");
        match read_matrix(f.path()) {
            Err(MmError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn entry_count_mismatch() {
        let f = temp_file("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n");
        assert!(matches!(read_matrix(f.path()), Err(MmError::DimensionMismatch { .. })));
        let f = temp_file("%%MatrixMarket matrix coordinate real general\n2 3 0\n");
        assert!(matches!(read_matrix(f.path()), Err(MmError::NotSquare { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(read_matrix("/nonexistent/a.mtx"), Err(MmError::Io { .. })));
    }

    #[test]
    fn vector_formats() {
        let f = temp_file("%%MatrixMarket matrix array real general\n3 1\n1.5\n-2\n0\n");
        assert_eq!(read_vector(f.path()).unwrap(), vec![1.5, -2.0, 0.0]);
        let f = temp_file("%%MatrixMarket matrix coordinate real general\n3 1 1\n2 1 7.0\n");
        assert_eq!(read_vector(f.path()).unwrap(), vec![0.0, 7.0, 0.0]);
        let f = temp_file("%%MatrixMarket matrix array real general\n3 1\n1.5\n");
        assert!(read_vector(f.path()).is_err());
    }
}
