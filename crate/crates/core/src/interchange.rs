//! Matrix Market I/O and spy-pattern rendering.
//!
//! Matrices are written in array format, `complex general`, with a lowercase
//! header and 17 significant digits per component. The reader additionally
//! accepts coordinate files and `real`/`integer` fields with `general`,
//! `symmetric` or `hermitian` symmetry.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{c64, ComplexMatrix};

pub const MM_HEADER: &str = "%%matrixmarket matrix array complex general";

pub fn to_matrix_market(m: &ComplexMatrix) -> String {
    let mut out = String::with_capacity(48 * m.rows() * m.cols() + 64);
    out.push_str(MM_HEADER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
        }
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &ComplexMatrix) -> Result<()> {
    fs::write(path, to_matrix_market(m))?;
    Ok(())
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("not a Matrix Market matrix header: {header:?}")));
    }
    let coordinate = match tokens[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(parse_err(1, format!("unsupported format {other:?}"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(size_line, e.to_string())))
        .collect::<Result<_>>()?;
    let (rows, cols) = match (coordinate, dims.as_slice()) {
        (false, [r, c]) => (*r, *c),
        (true, [r, c, _]) => (*r, *c),
        _ => return Err(parse_err(size_line, "malformed size line")),
    };
    if rows == 0 {
        return Err(parse_err(size_line, "matrix has no rows"));
    }
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }

    let per_value = if field == Field::Complex { 2 } else { 1 };
    let parse_value = |line: usize, parts: &[&str]| -> Result<Complex64> {
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(line, format!("{s:?}: {e}")));
        let re = num(parts[0])?;
        let im = if per_value == 2 { num(parts[1])? } else { 0.0 };
        if !re.is_finite() || !im.is_finite() {
            return Err(parse_err(line, "non-finite entry"));
        }
        Ok(c64(re, im))
    };

    let mut m = ComplexMatrix::zeros(rows, cols);
    let mirror = |m: &mut ComplexMatrix, i: usize, j: usize, z: Complex64| {
        m[(i, j)] = z;
        if i != j {
            m[(j, i)] = match symmetry {
                Symmetry::General => return,
                Symmetry::Symmetric => z,
                Symmetry::Hermitian => z.conj(),
            };
        }
    };

    if coordinate {
        let nnz = dims[2];
        let mut seen = 0;
        for (ln, l) in body {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 + per_value {
                return Err(parse_err(ln, "wrong number of fields"));
            }
            let idx = |s: &str, bound: usize| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| parse_err(ln, format!("bad index {s:?}")))?;
                if v == 0 || v > bound {
                    return Err(parse_err(ln, format!("index {v} out of range")));
                }
                Ok(v - 1)
            };
            let (i, j) = (idx(parts[0], rows)?, idx(parts[1], cols)?);
            let z = parse_value(ln, &parts[2..])?;
            mirror(&mut m, i, j, z);
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(0, format!("expected {nnz} entries, found {seen}")));
        }
    } else {
        let mut positions = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            let start = if symmetry == Symmetry::General { 0 } else { j };
            for i in start..rows {
                positions.push((i, j));
            }
        }
        let mut k = 0;
        for (ln, l) in body {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != per_value {
                return Err(parse_err(ln, "wrong number of fields"));
            }
            let &(i, j) = positions.get(k).ok_or_else(|| parse_err(ln, "too many entries"))?;
            let z = parse_value(ln, &parts)?;
            mirror(&mut m, i, j, z);
            k += 1;
        }
        if k != positions.len() {
            return Err(parse_err(0, format!("expected {} entries, found {k}", positions.len())));
        }
    }
    Ok(m)
}

/// Entries with `|t_ij| > tol·‖T‖_F` are significant.
pub fn spy_mask(t: &ComplexMatrix, tol: f64) -> Vec<Vec<bool>> {
    let threshold = tol * t.frobenius_norm();
    (0..t.rows())
        .map(|i| (0..t.cols()).map(|j| t[(i, j)].norm() > threshold).collect())
        .collect()
}

pub fn spy_ascii(t: &ComplexMatrix, tol: f64) -> String {
    let mut out = String::with_capacity((t.cols() + 1) * t.rows());
    for row in spy_mask(t, tol) {
        out.extend(row.iter().map(|&b| if b { '*' } else { '.' }));
        out.push('\n');
    }
    out
}

/// Binary PGM (P5): black pixels for significant entries on white.
pub fn spy_pgm(t: &ComplexMatrix, tol: f64) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", t.cols(), t.rows()).into_bytes();
    for row in spy_mask(t, tol) {
        out.extend(row.iter().map(|&b| if b { 0u8 } else { 255u8 }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = ComplexMatrix::from_fn(3, 2, |i, j| c64(1.0 / (i + j + 1) as f64, -(i as f64).sqrt() * 1e-300));
        let back = parse_matrix_market(&to_matrix_market(&m)).unwrap();
        assert_eq!(back, m);
        assert!(to_matrix_market(&m).starts_with("%%matrixmarket matrix array complex general\n3 2\n"));
    }

    #[test]
    fn reads_coordinate_hermitian() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n% c\n2 2 2\n1 1 1.0 0.0\n2 1 0.0 2.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], c64(0.0, 2.0));
        assert_eq!(m[(0, 1)], c64(0.0, -2.0));
        assert_eq!(m[(1, 1)], c64(0.0, 0.0));
    }

    #[test]
    fn reads_real_symmetric_array() {
        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 3.0]]).unwrap());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_matrix_market("").is_err());
        assert!(parse_matrix_market("%%matrixmarket matrix array complex general\n2 2\n1 0\n").is_err());
        assert!(parse_matrix_market("%%matrixmarket matrix array complex general\n1 1\nnan 0\n").is_err());
        assert!(parse_matrix_market("%%matrixmarket vector array complex general\n1 1\n1 0\n").is_err());
    }

    #[test]
    fn identity_spy() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(spy_ascii(&i3, 1e-12), "*..\n.*.\n..*\n");
        let pgm = spy_pgm(&i3, 1e-12);
        assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(&pgm[pgm.len() - 9..], &[0, 255, 255, 255, 0, 255, 255, 255, 0]);
    }
}
