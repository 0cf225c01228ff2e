//! Reading whitespace-separated numeric tables.
//!
//! One observation per row: the predictor columns first, then an optional
//! response column.  Columns are separated by spaces or tabs; blank lines
//! and lines whose first non-space character is `#` are skipped.  Parse
//! errors name the file and line.

use crate::error::CliError;
use std::fs;
use std::path::Path;
use tube_core::Dataset;

/// A rectangular block of numbers read from a file.
pub struct NumericTable {
    pub rows: Vec<Vec<f64>>,
    pub columns: usize,
}

/// Whether a response column must, must not, or may follow the predictors.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Required,
    Forbidden,
    Optional,
}

pub fn read_table(path: &Path) -> Result<NumericTable, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut columns = 0usize;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| {
                CliError::io(format!(
                    "{}:{}: cannot parse '{token}' as a number",
                    path.display(),
                    index + 1
                ))
            })?;
            row.push(value);
        }
        if rows.is_empty() {
            columns = row.len();
        } else if row.len() != columns {
            return Err(CliError::io(format!(
                "{}:{}: expected {columns} columns as on earlier rows, found {}",
                path.display(),
                index + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::io(format!(
            "{}: no data rows (only blanks and comments)",
            path.display()
        )));
    }
    Ok(NumericTable { rows, columns })
}

/// Split a table into `d` predictor columns and the response dictated by
/// `response`, and validate it as a dataset.
pub fn to_dataset(
    table: &NumericTable,
    path: &Path,
    d: usize,
    response: Response,
) -> Result<Dataset, CliError> {
    let with_y = match response {
        Response::Required => {
            if table.columns != d + 1 {
                return Err(CliError::io(format!(
                    "{}: expected {} columns ({d} predictors and a response), found {}",
                    path.display(),
                    d + 1,
                    table.columns
                )));
            }
            true
        }
        Response::Forbidden => {
            if table.columns != d {
                return Err(CliError::io(format!(
                    "{}: expected {d} predictor columns and no response, found {}",
                    path.display(),
                    table.columns
                )));
            }
            false
        }
        Response::Optional => {
            if table.columns != d && table.columns != d + 1 {
                return Err(CliError::io(format!(
                    "{}: expected {d} predictor columns plus an optional response, found {}",
                    path.display(),
                    table.columns
                )));
            }
            table.columns == d + 1
        }
    };
    let mut x = Vec::with_capacity(table.rows.len() * d);
    let mut y = with_y.then(|| Vec::with_capacity(table.rows.len()));
    for row in &table.rows {
        x.extend_from_slice(&row[..d]);
        if let Some(y) = y.as_mut() {
            y.push(row[d]);
        }
    }
    Dataset::new(x, d, y).map_err(CliError::from)
}
