//! Reading numeric CSV matrices with header auto-detection.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::DataMatrix;

/// Read a numeric matrix (rows = observations). A header row is detected by
/// a non-numeric cell in the first line and skipped. Errors name the
/// offending cell with 1-based line and column numbers.
pub fn read_matrix(path: &Path) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(col, cell)| cell.parse::<f64>().map_err(|_| col))
            .collect();
        match parsed {
            Ok(vals) => {
                if let Some(w) = width {
                    if vals.len() != w {
                        return Err(Error::invalid(format!(
                            "{}: line {line} has {} columns, expected {w}",
                            path.display(),
                            vals.len()
                        )));
                    }
                } else {
                    width = Some(vals.len());
                }
                rows.push(vals);
            }
            Err(col) => {
                if idx == 0 {
                    continue; // header row
                }
                return Err(Error::invalid(format!(
                    "{}: line {line}, column {}: cannot parse '{}' as a number",
                    path.display(),
                    col + 1,
                    &record[col]
                )));
            }
        }
    }

    let n = rows.len();
    let p = width.ok_or_else(|| Error::invalid(format!("{}: no data rows", path.display())))?;
    let mut x = Array2::<f64>::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid(format!(
            "{}: matrix contains non-finite values",
            path.display()
        )));
    }
    Ok(x)
}

/// Write a matrix as headerless CSV with shortest round-trip formatting.
pub fn write_matrix(x: &DataMatrix, path: &Path) -> std::io::Result<()> {
    let mut out = String::new();
    for i in 0..x.nrows() {
        let row: Vec<String> = (0..x.ncols()).map(|j| format!("{}", x[[i, j]])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}
