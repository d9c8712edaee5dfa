//! Plain-text formats: Matrix Market coordinate (real, symmetric),
//! whitespace-delimited dense matrices, and one-value-per-line vectors.
//!
//! Numbers are written with `{:e}`, the shortest representation that
//! round-trips exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::operator::{DenseSymmetric, SymmetricOperator};
use crate::scalar::Real;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: Real>(tok: &str, line: usize) -> Result<T> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(T::lit(v))
}

fn parse_index(tok: &str, line: usize, n: usize) -> Result<usize> {
    let i: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("not an index: {tok:?}")))?;
    if i == 0 || i > n {
        return Err(parse_err(line, format!("index {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

/// Lines with their 1-based numbers, skipping blanks and `skip`-prefixed comments.
fn content_lines<R: Read>(
    reader: R,
    comment: char,
) -> impl Iterator<Item = Result<(usize, String)>> {
    BufReader::new(reader)
        .lines()
        .enumerate()
        .filter_map(move |(i, l)| match l {
            Err(e) => Some(Err(Error::io("<input>", e))),
            Ok(s) => {
                let t = s.trim();
                if t.is_empty() || t.starts_with(comment) {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        })
}

/// Reads a `coordinate real|integer symmetric|general` Matrix Market file.
/// Symmetric files may list either triangle; general files must be exactly
/// symmetric. Repeated entries are an error.
pub fn read_matrix_market<T: Real, R: Read>(reader: R) -> Result<DenseSymmetric<T>> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header.map_err(|e| Error::io("<input>", e))?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "missing '%%MatrixMarket matrix ...' header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format {:?}", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" && fields[3] != "double" {
        return Err(parse_err(1, format!("unsupported field {:?}", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut full: Option<Matrix<T>> = None;
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for (i, l) in lines {
        let lineno = i + 1;
        let l = l.map_err(|e| Error::io("<input>", e))?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(lineno, "expected 'rows cols entries'"));
                }
                let r: usize = toks[0]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad row count"))?;
                let c: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad column count"))?;
                let nnz: usize = toks[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad entry count"))?;
                if r != c || r == 0 {
                    return Err(parse_err(
                        lineno,
                        format!("matrix must be square and nonempty, got {r}x{c}"),
                    ));
                }
                size = Some((r, c, nnz));
                full = Some(Matrix::zeros(r, r));
            }
            Some((n, _, nnz)) => {
                if toks.len() != 3 {
                    return Err(parse_err(lineno, "expected 'row col value'"));
                }
                let r = parse_index(toks[0], lineno, n)?;
                let c = parse_index(toks[1], lineno, n)?;
                let v: T = parse_num(toks[2], lineno)?;
                let key = if symmetric {
                    (r.max(c), r.min(c))
                } else {
                    (r, c)
                };
                if !seen.insert(key) {
                    return Err(parse_err(
                        lineno,
                        format!("duplicate entry ({}, {})", r + 1, c + 1),
                    ));
                }
                count += 1;
                if count > nnz {
                    return Err(parse_err(
                        lineno,
                        format!("more than the declared {nnz} entries"),
                    ));
                }
                let m = full.as_mut().expect("sized");
                m[(r, c)] = v;
                if symmetric {
                    m[(c, r)] = v;
                }
            }
        }
    }
    let (_, _, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if count != nnz {
        return Err(parse_err(
            0,
            format!("declared {nnz} entries, found {count}"),
        ));
    }
    DenseSymmetric::from_matrix(&full.expect("sized"))
}

/// Writes the lower triangle (nonzeros only) as `coordinate real symmetric`.
pub fn write_matrix_market<T: Real, W: Write>(a: &DenseSymmetric<T>, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let n = a.dim();
    let mut entries = Vec::new();
    for j in 0..n {
        for i in j..n {
            let v = a.get(i, j);
            if v != T::zero() {
                entries.push((i, j, v));
            }
        }
    }
    let io = |e| Error::io("<output>", e);
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric").map_err(io)?;
    writeln!(w, "{n} {n} {}", entries.len()).map_err(io)?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v.to_f64_lossy()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Square, exactly symmetric matrix given as whitespace-separated rows.
/// Lines starting with `#` are comments.
pub fn read_dense_text<T: Real, R: Read>(reader: R) -> Result<DenseSymmetric<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for item in content_lines(reader, '#') {
        let (lineno, l) = item?;
        let row = l
            .split_whitespace()
            .map(|t| parse_num(t, lineno))
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    lineno,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no rows"));
    }
    if rows.len() != rows[0].len() {
        return Err(parse_err(
            0,
            format!("matrix is {}x{}, not square", rows.len(), rows[0].len()),
        ));
    }
    DenseSymmetric::from_matrix(&Matrix::from_rows(&rows)?)
}

/// One value per line; `#` comments and blank lines are skipped.
pub fn read_vector<T: Real, R: Read>(reader: R) -> Result<Vec<T>> {
    let mut v = Vec::new();
    for item in content_lines(reader, '#') {
        let (lineno, l) = item?;
        let mut toks = l.split_whitespace();
        let tok = toks.next().expect("nonempty line");
        if toks.next().is_some() {
            return Err(parse_err(lineno, "expected exactly one value per line"));
        }
        v.push(parse_num(tok, lineno)?);
    }
    if v.is_empty() {
        return Err(parse_err(0, "no values"));
    }
    Ok(v)
}

pub fn write_vector<T: Real, W: Write>(v: &[T], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let io = |e| Error::io("<output>", e);
    for x in v {
        writeln!(w, "{:e}", x.to_f64_lossy()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Attaches the path to I/O errors raised while reading from a file.
fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Matrix Market if the file starts with `%%MatrixMarket`, dense text otherwise.
pub fn load_matrix<T: Real>(path: impl AsRef<Path>) -> Result<DenseSymmetric<T>> {
    let path = path.as_ref();
    let mut head = [0u8; 14];
    let n = open(path)?
        .read(&mut head)
        .map_err(|e| Error::io(path, e))?;
    let is_mm = head[..n].eq_ignore_ascii_case(&b"%%MatrixMarket"[..n.min(14)]) && n == 14;
    let file = open(path)?;
    with_path(
        path,
        if is_mm {
            read_matrix_market(file)
        } else {
            read_dense_text(file)
        },
    )
}

pub fn load_vector<T: Real>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    with_path(path, read_vector(open(path)?))
}

pub fn save_matrix_market<T: Real>(a: &DenseSymmetric<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    with_path(path, write_matrix_market(a, create(path)?))
}

pub fn save_vector<T: Real>(v: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    with_path(path, write_vector(v, create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_round_trip_is_exact() {
        let a = DenseSymmetric::from_fn(4, |i, j| {
            if i == j {
                1.0 / (i as f64 + 3.0)
            } else if i + j == 3 {
                -0.1 * (i.max(j) as f64)
            } else {
                0.0
            }
        });
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b: DenseSymmetric<f64> = read_matrix_market(&buf[..]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matrix_market_accepts_either_triangle_and_comments() {
        let text =
            "%%MatrixMarket matrix coordinate real symmetric\n% hi\n\n2 2 2\n1 2 5\n2 2 -1\n";
        let a: DenseSymmetric<f64> = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.get(1, 0), 5.0);
        assert_eq!(a.get(0, 0), 0.0);
        assert_eq!(a.get(1, 1), -1.0);
    }

    #[test]
    fn matrix_market_errors_carry_line_numbers() {
        let bad = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n";
        match read_matrix_market::<f64, _>(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 abc\n";
        assert!(matches!(
            read_matrix_market::<f64, _>(bad.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let dup = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 2 1\n2 1 1\n";
        assert!(matches!(
            read_matrix_market::<f64, _>(dup.as_bytes()),
            Err(Error::Parse { line: 4, .. })
        ));
        let general = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1\n";
        assert!(matches!(
            read_matrix_market::<f64, _>(general.as_bytes()),
            Err(Error::Validation(_))
        ));
        let header = "%%MatrixMarket matrix array real symmetric\n";
        assert!(matches!(
            read_matrix_market::<f64, _>(header.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn dense_text_and_vectors() {
        let a: DenseSymmetric<f64> = read_dense_text("# m\n2 1\n1 3\n".as_bytes()).unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert!(matches!(
            read_dense_text::<f64, _>("1 2\n3\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_dense_text::<f64, _>("1 2\n3 4\n".as_bytes()),
            Err(Error::Validation(_))
        ));
        let v: Vec<f64> = read_vector("1\n\n-2.5e-3\n# c\n4\n".as_bytes()).unwrap();
        assert_eq!(v, vec![1.0, -2.5e-3, 4.0]);
        assert!(matches!(
            read_vector::<f64, _>("1\n2 3\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let mut buf = Vec::new();
        write_vector(&[0.1f64, -3.0, 1e-300], &mut buf).unwrap();
        let back: Vec<f64> = read_vector(&buf[..]).unwrap();
        assert_eq!(back, vec![0.1, -3.0, 1e-300]);
    }

    #[test]
    fn files_report_their_path() {
        let err = load_vector::<f64>("/nonexistent/rhs.txt").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/rhs.txt"));
    }
}
