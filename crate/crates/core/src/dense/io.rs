//! Plain-text matrix format: a `rows cols` header line followed by `rows`
//! lines of `cols` whitespace-separated decimals. Values are written with 17
//! significant digits so that a write/read cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Seventeen significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = (0..m.cols()).map(|j| format_real(m.get(i, j))).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing `rows cols` header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad header: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header must hold two counts, found {}", dims.len()),
        });
    };

    let mut row_data = Vec::with_capacity(rows);
    for (lineno, line) in lines {
        if row_data.len() == rows {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("more than {rows} data rows"),
            });
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad number `{t}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if vals.len() != cols {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {cols} values, found {}", vals.len()),
            });
        }
        row_data.push(vals);
    }
    if row_data.len() != rows {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected {rows} data rows, found {}", row_data.len()),
        });
    }
    if rows == 0 {
        return Ok(DenseMatrix::zeros(0, cols));
    }
    DenseMatrix::from_rows(&row_data)
}

/// A vector stored as an `n x 1` (or `1 x n`) matrix.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let m = parse_matrix(text)?;
    match (m.rows(), m.cols()) {
        (_, 1) => Ok(m.col(0).to_vec()),
        (1, _) => Ok(m.row(0)),
        (r, c) => Err(Error::Parse {
            line: 1,
            msg: format!("expected a vector, found a {r}x{c} matrix"),
        }),
    }
}

pub fn format_vector(v: &[f64]) -> String {
    format_matrix(&DenseMatrix::column_vector(v))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    Ok(fs::write(path, format_matrix(m))?)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    Ok(fs::write(path, format_vector(v))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_header_and_rows() {
        let m = parse_matrix("2 3\n1 2 3\n4 5 6e-1\n").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.get(1, 2), 0.6);
    }

    #[test]
    fn reports_ragged_rows() {
        let err = parse_matrix("2 2\n1 2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn reports_missing_rows() {
        assert!(matches!(parse_matrix("3 1\n1\n2\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn rejects_nan() {
        assert!(parse_matrix("1 1\nNaN\n").is_err());
    }

    #[test]
    fn vectors_accept_either_orientation() {
        assert_eq!(parse_vector("1 2\n1 2\n").unwrap(), vec![1.0, 2.0]);
        assert_eq!(parse_vector("2 1\n1\n2\n").unwrap(), vec![1.0, 2.0]);
        assert!(parse_vector("2 2\n1 2\n3 4\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in prop::collection::vec(-1e6f64..1e6, 25),
            scale in prop::sample::select(vec![1e-300, 1e-12, 1.0, 1e12]),
        ) {
            let data: Vec<f64> = seed.iter().take(rows * cols).map(|v| v * scale).collect();
            let m = DenseMatrix::new(rows, cols, data).unwrap();
            let back = parse_matrix(&format_matrix(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
