//! CSV ingestion for user-supplied observation matrices.

use std::path::Path;

use crate::designs::DataMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Dataset {
    pub data: DataMatrix,
    pub column_labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn cols(&self) -> usize {
        self.data.cols()
    }
}

/// Reads a comma-separated numeric matrix.
///
/// A first row in which no cell parses as a number is taken as a header.
/// With `standardize`, each column is centred and divided by its sample
/// standard deviation (n − 1 denominator).
pub fn ingest_csv(path: impl AsRef<Path>, standardize: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let err = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;

    let mut labels = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            labels = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(err(format!(
                "row {line}: expected {expected} fields, found {}",
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(expected);
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| err(format!("row {line}, column {}: not a number: {cell:?}", c + 1)))?;
            if !v.is_finite() {
                return Err(err(format!("row {line}, column {}: non-finite value {cell:?}", c + 1)));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(err("no data rows".into()));
    }
    let mut data = DataMatrix::from_rows(&rows)?;
    if standardize {
        standardize_columns(&mut data).map_err(|e| err(e.to_string()))?;
    }
    Ok(Dataset {
        data,
        column_labels: labels,
    })
}

/// Centres every column and scales it to unit sample standard deviation.
pub fn standardize_columns(data: &mut DataMatrix) -> Result<()> {
    let (n, p) = (data.rows(), data.cols());
    if n < 2 {
        return Err(Error::InvalidParameter("standardization needs at least 2 rows".into()));
    }
    for j in 0..p {
        let col = data.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::InvalidParameter(format!("column {} is constant", j + 1)));
        }
        let values = data.values_mut();
        for i in 0..n {
            values[i * p + j] = (values[i * p + j] - mean) / sd;
        }
    }
    Ok(())
}
