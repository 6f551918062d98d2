use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, SquareMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    /// Comma-separated, one matrix row per line.
    Csv,
    /// MatrixMarket dense `array real general`, entries in column-major order.
    MatrixMarket,
}

impl MatrixFormat {
    /// `.mtx` and `.mm` mean MatrixMarket, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") | Some("mm") => Self::MatrixMarket,
            _ => Self::Csv,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "mm" | "mtx" | "matrix-market" => Ok(Self::MatrixMarket),
            other => Err(Error::Config(format!(
                "unknown matrix format `{other}` (expected csv or mm)"
            ))),
        }
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_number(tok: &str, line: usize, column: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, column, format!("`{tok}` is not a number")))
}

pub fn parse_csv(text: &str) -> Result<SquareMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut column = 1;
        for field in raw.split(',') {
            let lead = field.len() - field.trim_start().len();
            row.push(parse_number(field.trim(), line, column + lead)?);
            column += field.len() + 1;
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    line,
                    1,
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    SquareMatrix::new(Mat::from_row_slice(r, c, &flat))
}

pub fn parse_matrix_market(text: &str) -> Result<SquareMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty file"))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(1, 1, "missing %%MatrixMarket header"));
    }
    if words[1..] != ["matrix", "array", "real", "general"] {
        return Err(parse_err(
            1,
            1,
            "only `matrix array real general` is supported",
        ));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut entries = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if trimmed.starts_with('%') || trimmed.is_empty() {
            continue;
        }
        let mut column = raw.len() - trimmed.len() + 1;
        let mut rest = trimmed;
        while !rest.is_empty() {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let tok = &rest[..end];
            match size {
                None => {
                    let dims: Vec<&str> = trimmed.split_whitespace().collect();
                    if dims.len() != 2 {
                        return Err(parse_err(line, column, "expected `rows cols`"));
                    }
                    let parse_dim = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|_| parse_err(line, column, format!("`{s}` is not a dimension")))
                    };
                    let (r, c) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
                    if r != c {
                        return Err(Error::NotSquare { rows: r, cols: c });
                    }
                    size = Some((r, c));
                    break;
                }
                Some(_) => entries.push(parse_number(tok, line, column)?),
            }
            let after = &rest[end..];
            let skipped = after.len() - after.trim_start().len();
            column += end + skipped;
            rest = after.trim_start();
        }
    }
    let (r, c) = size.ok_or_else(|| parse_err(text.lines().count().max(1), 1, "missing size line"))?;
    if entries.len() != r * c {
        return Err(parse_err(
            text.lines().count().max(1),
            1,
            format!("expected {} entries, found {}", r * c, entries.len()),
        ));
    }
    SquareMatrix::new(Mat::from_column_slice(r, c, &entries))
}

pub fn ingest_matrix(path: &Path, format: MatrixFormat) -> Result<SquareMatrix> {
    let text = std::fs::read_to_string(path)?;
    match format {
        MatrixFormat::Csv => parse_csv(&text),
        MatrixFormat::MatrixMarket => parse_matrix_market(&text),
    }
}

/// Renders with 17 significant digits, enough for an exact round trip.
pub fn format_matrix(m: &Mat, format: MatrixFormat) -> String {
    let mut out = String::new();
    match format {
        MatrixFormat::Csv => {
            for i in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        MatrixFormat::MatrixMarket => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
            for x in m.iter() {
                let _ = writeln!(out, "{x:.16e}");
            }
        }
    }
    out
}

pub fn write_matrix(path: &Path, m: &Mat, format: MatrixFormat) -> Result<()> {
    std::fs::write(path, format_matrix(m, format))?;
    Ok(())
}
