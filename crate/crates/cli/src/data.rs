//! CSV ingestion and covariate standardization.

use std::fmt;
use std::path::Path;

use localq::Dataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("row {row}, column '{col}': cannot parse '{value}' as a finite number")]
    ParseError {
        row: usize,
        col: String,
        value: String,
    },
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    #[error("column '{0}' is constant and cannot be normalized")]
    ConstantColumn(String),
    #[error("no data rows")]
    Empty,
    #[error(transparent)]
    Invalid(#[from] localq::Error),
}

/// Per-column affine map `z = (x - mean) / sd` applied to the covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Normalization {
    pub fn forward(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(z, (m, s))| m + s * z)
            .collect()
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "normalized '{c}': mean = {}, sd = {}",
                self.means[i], self.sds[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub dataset: Dataset,
    pub normalization: Option<Normalization>,
}

fn parse_cell(raw: &str, row: usize, col: &str) -> Result<f64, DataError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::ParseError {
            row,
            col: col.to_string(),
            value: raw.to_string(),
        })
}

/// Named columns of a headed CSV file, each as a vector of finite values.
/// Rows are numbered from 1 for the first data line.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>, DataError> {
    let io = |e: csv::Error| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(io)?;
    let headers = reader.headers().map_err(io)?.clone();
    let idx = names
        .iter()
        .map(|&name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingColumn(name.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut columns = vec![Vec::new(); names.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(io)?;
        for ((&j, &name), column) in idx.iter().zip(names).zip(columns.iter_mut()) {
            column.push(parse_cell(record.get(j).unwrap_or(""), i + 1, name)?);
        }
    }
    if columns.first().is_none_or(Vec::is_empty) {
        return Err(DataError::Empty);
    }
    Ok(columns)
}

/// A single response column, for covariate-free intervals.
pub fn load_responses(path: &Path, y_column: &str) -> Result<Vec<f64>, DataError> {
    Ok(read_columns(path, &[y_column])?.remove(0))
}

/// Read covariate and response columns into a [`Dataset`]. With `normalize`,
/// every covariate column is standardized by its mean and sample standard
/// deviation; responses are never transformed.
pub fn load_csv(
    path: &Path,
    x_columns: &[String],
    y_column: &str,
    normalize: bool,
) -> Result<LoadedData, DataError> {
    let mut names: Vec<&str> = x_columns.iter().map(String::as_str).collect();
    names.push(y_column);
    let mut columns = read_columns(path, &names)?;
    let responses = columns.pop().unwrap_or_default();
    let n = responses.len();

    let normalization = if normalize {
        let mut means = Vec::with_capacity(columns.len());
        let mut sds = Vec::with_capacity(columns.len());
        for (column, name) in columns.iter_mut().zip(x_columns) {
            let mean = column.iter().sum::<f64>() / n as f64;
            let ss = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            let sd = if n > 1 {
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            if sd.is_nan() || sd <= 0.0 {
                return Err(DataError::ConstantColumn(name.clone()));
            }
            column.iter_mut().for_each(|x| *x = (*x - mean) / sd);
            means.push(mean);
            sds.push(sd);
        }
        Some(Normalization {
            columns: x_columns.to_vec(),
            means,
            sds,
        })
    } else {
        None
    };

    let covariates: Vec<f64> = (0..n)
        .flat_map(|i| columns.iter().map(move |c| c[i]))
        .collect();
    let dataset = Dataset::new(covariates, x_columns.len(), responses)?
        .with_names(x_columns.to_vec(), y_column.to_string())?;
    Ok(LoadedData {
        dataset,
        normalization,
    })
}
