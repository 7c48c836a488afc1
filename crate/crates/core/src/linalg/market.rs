use super::{LinalgError, SparseBuilder, SparseMatrix};
use crate::Real;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Writes a sparse matrix as Matrix Market "coordinate real general" with
/// 1-based indices and full-precision values.
pub fn write_matrix_market<T: Real>(
    path: impl AsRef<Path>,
    matrix: &SparseMatrix<T>,
) -> Result<(), LinalgError> {
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(
        out,
        "{} {} {}",
        matrix.n_rows(),
        matrix.n_cols(),
        matrix.nnz()
    )?;
    for (r, c, v) in matrix.iter() {
        writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a Matrix Market coordinate file. `general` files are taken as-is;
/// `symmetric` files store the lower triangle and get their off-diagonal
/// entries mirrored.
pub fn read_matrix_market<T: Real>(path: impl AsRef<Path>) -> Result<SparseMatrix<T>, LinalgError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(parse_error(1, "empty file")),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5
        || !fields[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !fields[1].eq_ignore_ascii_case("matrix")
        || !fields[2].eq_ignore_ascii_case("coordinate")
        || !fields[3].eq_ignore_ascii_case("real")
    {
        return Err(parse_error(1, "expected '%%MatrixMarket matrix coordinate real <symmetry>' header"));
    }
    let symmetric = match fields[4].to_ascii_lowercase().as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_error(1, &format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut builder: Option<SparseBuilder<T>> = None;
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(LinalgError::Io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        if size.is_none() {
            let rows = parse_index(parts.next(), line_no)?;
            let cols = parse_index(parts.next(), line_no)?;
            let nnz = parse_index(parts.next(), line_no)?;
            if parts.next().is_some() {
                return Err(parse_error(line_no, "trailing fields on size line"));
            }
            size = Some((rows, cols, nnz));
            builder = Some(SparseBuilder::new(rows, cols));
            continue;
        }
        let (rows, cols, nnz) = size.unwrap();
        let r = parse_index(parts.next(), line_no)?;
        let c = parse_index(parts.next(), line_no)?;
        let v: f64 = parts
            .next()
            .ok_or_else(|| parse_error(line_no, "missing value field"))?
            .parse()
            .map_err(|_| parse_error(line_no, "unparseable value"))?;
        if parts.next().is_some() {
            return Err(parse_error(line_no, "trailing fields on entry line"));
        }
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_error(line_no, "index out of bounds"));
        }
        seen += 1;
        if seen > nnz {
            return Err(parse_error(line_no, "more entries than declared"));
        }
        let b = builder.as_mut().unwrap();
        b.add(r - 1, c - 1, T::of(v));
        if symmetric && r != c {
            b.add(c - 1, r - 1, T::of(v));
        }
    }
    let (_, _, nnz) = size.ok_or_else(|| parse_error(1, "missing size line"))?;
    if seen != nnz {
        return Err(parse_error(0, &format!("declared {nnz} entries, found {seen}")));
    }
    Ok(builder.unwrap().build())
}

fn parse_index(field: Option<&str>, line: usize) -> Result<usize, LinalgError> {
    field
        .ok_or_else(|| parse_error(line, "missing index field"))?
        .parse()
        .map_err(|_| parse_error(line, "unparseable index"))
}

fn parse_error(line: usize, message: &str) -> LinalgError {
    LinalgError::MarketParse {
        line,
        message: message.to_string(),
    }
}
