//! Matrix Market (coordinate layout) ingestion.
//!
//! Accepts `real`, `integer` and `pattern` fields with `general` or
//! `symmetric` symmetry. Symmetric files are expanded to full storage,
//! pattern entries get value 1.0, and duplicate coordinates are summed.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::MarketError;
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Parse a Matrix Market stream into CSR storage.
pub fn read_matrix_market<R: Real>(
    reader: impl BufRead,
) -> Result<SparseMatrix<R>, MarketError> {
    let mut lines = reader.lines().enumerate();

    let (field, symmetry) = {
        let (_, first) = lines
            .next()
            .ok_or_else(|| MarketError::MalformedHeader("empty input".into()))?;
        let first = first.map_err(|e| MarketError::Io(e.to_string()))?;
        parse_header(&first)?
    };

    // size line: first non-comment, non-blank line after the header
    let (mut n, mut declared_nnz, mut size_seen) = (0usize, 0usize, false);
    let mut entries: Vec<(usize, usize, R)> = Vec::new();
    let mut seen = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| MarketError::Io(e.to_string()))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        if !size_seen {
            let (rows, cols, nnz) = parse_size_line(text, lineno)?;
            if rows != cols {
                return Err(MarketError::NonSquare { rows, cols });
            }
            n = rows;
            declared_nnz = nnz;
            size_seen = true;
            entries.reserve(nnz);
            continue;
        }
        if seen == declared_nnz {
            return Err(MarketError::TooManyEntries {
                expected: declared_nnz,
            });
        }
        let (row, col, value) = parse_entry::<R>(text, lineno, field)?;
        if row == 0 || col == 0 || row > n || col > n {
            return Err(MarketError::IndexOutOfRange {
                row,
                col,
                n,
                line: lineno,
            });
        }
        let (r, c) = (row - 1, col - 1);
        entries.push((r, c, value));
        if symmetry == Symmetry::Symmetric && r != c {
            entries.push((c, r, value));
        }
        seen += 1;
    }

    if !size_seen {
        return Err(MarketError::MalformedHeader(
            "missing size line".into(),
        ));
    }
    if seen < declared_nnz {
        return Err(MarketError::TooFewEntries {
            got: seen,
            expected: declared_nnz,
        });
    }

    SparseMatrix::from_triplets(n, &entries)
        .map_err(|e| MarketError::Parse {
            line: 0,
            reason: e.to_string(),
        })
}

/// Open and parse a Matrix Market file.
pub fn read_matrix_market_file<R: Real>(
    path: impl AsRef<Path>,
) -> Result<SparseMatrix<R>, MarketError> {
    let file = File::open(path.as_ref()).map_err(|e| {
        MarketError::Io(format!("{}: {e}", path.as_ref().display()))
    })?;
    read_matrix_market(BufReader::new(file))
}

fn parse_header(line: &str) -> Result<(Field, Symmetry), MarketError> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_lowercase()).collect();
    if tokens.len() != 5 || !tokens[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(MarketError::MalformedHeader(format!(
            "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`, got `{line}`"
        )));
    }
    if tokens[1] != "matrix" {
        return Err(MarketError::MalformedHeader(format!(
            "unsupported object `{}`",
            tokens[1]
        )));
    }
    match tokens[2].as_str() {
        "coordinate" => {}
        "array" => return Err(MarketError::ArrayFormat),
        other => {
            return Err(MarketError::MalformedHeader(format!(
                "unsupported format `{other}`"
            )))
        }
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        "complex" => return Err(MarketError::ComplexField),
        other => return Err(MarketError::UnsupportedField(other.to_string())),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(MarketError::UnsupportedSymmetry(other.to_string())),
    };
    Ok((field, symmetry))
}

fn parse_size_line(text: &str, line: usize) -> Result<(usize, usize, usize), MarketError> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize, MarketError> {
        it.next()
            .ok_or_else(|| MarketError::Parse {
                line,
                reason: format!("missing {what} in size line"),
            })?
            .parse::<usize>()
            .map_err(|_| MarketError::Parse {
                line,
                reason: format!("cannot parse {what} in size line"),
            })
    };
    let rows = next("row count")?;
    let cols = next("column count")?;
    let nnz = next("entry count")?;
    Ok((rows, cols, nnz))
}

fn parse_entry<R: Real>(
    text: &str,
    line: usize,
    field: Field,
) -> Result<(usize, usize, R), MarketError> {
    let mut it = text.split_whitespace();
    let row: usize = it
        .next()
        .ok_or_else(|| MarketError::Parse {
            line,
            reason: "missing row index".into(),
        })?
        .parse()
        .map_err(|_| MarketError::Parse {
            line,
            reason: "cannot parse row index".into(),
        })?;
    let col: usize = it
        .next()
        .ok_or_else(|| MarketError::Parse {
            line,
            reason: "missing column index".into(),
        })?
        .parse()
        .map_err(|_| MarketError::Parse {
            line,
            reason: "cannot parse column index".into(),
        })?;
    let value = match field {
        Field::Pattern => R::one(),
        Field::Real | Field::Integer => {
            let raw = it.next().ok_or_else(|| MarketError::Parse {
                line,
                reason: "missing value".into(),
            })?;
            let v: f64 = raw.parse().map_err(|_| MarketError::Parse {
                line,
                reason: format!("cannot parse value `{raw}`"),
            })?;
            R::of(v)
        }
    };
    Ok((row, col, value))
}
