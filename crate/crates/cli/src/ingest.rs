//! CSV ingestion: header row, comma delimiters, `.` decimals. Every column is
//! a factor unless claimed as the response or the id column; the intercept is
//! prepended here and must not appear in the file.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use odsample::{Dataset, PredictionSet};

use crate::error::{CliError, Result};

pub struct IngestedData {
    pub dataset: Dataset,
    /// Factor column names, in file order.
    pub factor_names: Vec<String>,
}

struct RawTable {
    factor_names: Vec<String>,
    factors: DMatrix<f64>,
    responses: Option<DVector<f64>>,
    ids: Option<Vec<u64>>,
}

fn read_table(
    path: &Path,
    response_column: Option<&str>,
    id_column: Option<&str>,
) -> Result<RawTable> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io {
                path: display.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => CliError::Parse {
                path: display.clone(),
                row: 0,
                detail: e.to_string(),
            },
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Parse {
            path: display.clone(),
            row: 0,
            detail: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() {
        return Err(CliError::Parse {
            path: display,
            row: 0,
            detail: "empty header row".into(),
        });
    }
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{display}: no column named '{name}'")))
    };
    let response_idx = response_column.map(&find).transpose()?;
    let id_idx = id_column.map(&find).transpose()?;
    if response_idx.is_some() && response_idx == id_idx {
        return Err(CliError::Config(format!(
            "{display}: response and id columns coincide"
        )));
    }
    let factor_cols: Vec<usize> = (0..headers.len())
        .filter(|i| Some(*i) != response_idx && Some(*i) != id_idx)
        .collect();
    if factor_cols.is_empty() {
        return Err(CliError::Config(format!("{display}: no factor columns left")));
    }

    let mut cells: Vec<f64> = Vec::new();
    let mut responses: Vec<f64> = Vec::new();
    let mut ids: Vec<u64> = Vec::new();
    let mut n_rows = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse {
            path: display.clone(),
            row: row_idx + 2,
            detail: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(CliError::Parse {
                path: display.clone(),
                row: row_idx + 2,
                detail: format!("expected {} cells, found {}", headers.len(), record.len()),
            });
        }
        let numeric = |col: usize| -> Result<f64> {
            let cell = record[col].trim();
            cell.parse::<f64>().map_err(|_| CliError::NonNumericCell {
                path: display.clone(),
                row: row_idx + 2,
                column: headers[col].clone(),
                cell: cell.to_string(),
            })
        };
        for &col in &factor_cols {
            cells.push(numeric(col)?);
        }
        if let Some(col) = response_idx {
            responses.push(numeric(col)?);
        }
        if let Some(col) = id_idx {
            let cell = record[col].trim();
            let id = cell.parse::<u64>().map_err(|_| CliError::NonNumericCell {
                path: display.clone(),
                row: row_idx + 2,
                column: headers[col].clone(),
                cell: cell.to_string(),
            })?;
            ids.push(id);
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(CliError::Parse {
            path: display,
            row: 1,
            detail: "no data rows".into(),
        });
    }
    if !ids.is_empty() {
        let mut seen = std::collections::HashSet::new();
        for &id in &ids {
            if !seen.insert(id) {
                return Err(CliError::DuplicateIds { id });
            }
        }
    }
    let factors = DMatrix::from_row_slice(n_rows, factor_cols.len(), &cells);
    Ok(RawTable {
        factor_names: factor_cols
            .iter()
            .map(|&c| headers[c].clone())
            .collect(),
        factors,
        responses: response_idx.map(|_| DVector::from_vec(responses)),
        ids: id_idx.map(|_| ids),
    })
}

/// Loads a pool CSV into a [`Dataset`], prepending the intercept column.
pub fn ingest_csv(
    path: &Path,
    response_column: Option<&str>,
    id_column: Option<&str>,
) -> Result<IngestedData> {
    let raw = read_table(path, response_column, id_column)?;
    let mut dataset = Dataset::from_factors(raw.factors, raw.responses)?;
    if let Some(ids) = raw.ids {
        dataset = dataset.with_ids(ids)?;
    }
    Ok(IngestedData {
        dataset,
        factor_names: raw.factor_names,
    })
}

/// Loads a prediction or test set whose factor columns must match the pool's,
/// returning its responses too when a response column is present.
pub fn ingest_point_set(
    path: &Path,
    expected_factors: &[String],
    response_column: Option<&str>,
) -> Result<(PredictionSet, Option<DVector<f64>>)> {
    // the response column is optional in point-set files
    let response_for_read = match response_column {
        Some(name) if header_contains(path, name)? => Some(name),
        _ => None,
    };
    let raw = read_table(path, response_for_read, None)?;
    if raw.factor_names != expected_factors {
        return Err(CliError::ShapeMismatch(format!(
            "{}: factor columns {:?} do not match the pool's {:?}",
            path.display(),
            raw.factor_names,
            expected_factors
        )));
    }
    let points = PredictionSet::from_factors(raw.factors)?;
    Ok((points, raw.responses))
}

fn header_contains(path: &Path, name: &str) -> Result<bool> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
    Ok(reader
        .headers()
        .map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            row: 0,
            detail: e.to_string(),
        })?
        .iter()
        .any(|h| h.trim() == name))
}

/// Reads a `sample.idx` file: one 0-based row index per line.
pub fn read_sample_idx(path: &Path, n_rows: usize) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let idx: usize = line.parse().map_err(|_| CliError::Parse {
            path: path.display().to_string(),
            row: lineno + 1,
            detail: format!("'{line}' is not a row index"),
        })?;
        if idx >= n_rows {
            return Err(CliError::ShapeMismatch(format!(
                "sample index {idx} out of range for {n_rows} rows"
            )));
        }
        out.push(idx);
    }
    if out.is_empty() {
        return Err(CliError::ShapeMismatch(format!(
            "{}: empty sample",
            path.display()
        )));
    }
    out.sort_unstable();
    for pair in out.windows(2) {
        if pair[0] == pair[1] {
            return Err(CliError::ShapeMismatch(format!(
                "duplicate sample index {}",
                pair[0]
            )));
        }
    }
    Ok(out)
}

/// Parses a comma-separated coefficient vector.
pub fn parse_coefficients(text: &str) -> Result<DVector<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|v| v.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(DVector::from_vec(v)),
        _ => Err(CliError::Config(format!(
            "'{text}' is not a comma-separated coefficient vector"
        ))),
    }
}
