//! CSV ingestion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// The GAG urine fixture shipped with the binary.
pub const BUNDLED_GAG: &str = include_str!("../../../data/gagurine.csv");
pub const BUNDLED_NAME: &str = "<bundled gagurine.csv>";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("column `{name}` not found; available columns: {}", available.join(", "))]
    MissingColumn {
        name: String,
        available: Vec<String>,
    },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("no complete numeric rows left in columns {}", .0.join(", "))]
    EmptyAfterFilter(Vec<String>),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Numeric columns of equal length.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub source: String,
    pub columns: BTreeMap<String, Vec<f64>>,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

impl Dataset {
    pub fn column(&self, name: &str) -> &[f64] {
        &self.columns[name]
    }

    pub fn rows(&self) -> usize {
        self.rows_read - self.rows_dropped
    }
}

/// Reads `columns` from `path`, or from the bundled fixture when `path` is
/// `None`. Rows with a missing or non-numeric entry in any requested column
/// are dropped and counted.
pub fn ingest_csv(path: Option<&Path>, columns: &[&str]) -> Result<Dataset, DatasetError> {
    match path {
        None => parse(BUNDLED_NAME.to_string(), BUNDLED_GAG.as_bytes(), columns),
        Some(p) => {
            if !p.exists() {
                return Err(DatasetError::FileNotFound(p.to_path_buf()));
            }
            let bytes = std::fs::read(p).map_err(|source| DatasetError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse(p.display().to_string(), &bytes[..], columns)
        }
    }
}

fn parse(source: String, bytes: &[u8], columns: &[&str]) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(DatasetError::DuplicateColumn(h.clone()));
        }
    }
    let mut index = Vec::with_capacity(columns.len());
    for &c in columns {
        match headers.iter().position(|h| h == c) {
            Some(i) => index.push(i),
            None => {
                return Err(DatasetError::MissingColumn {
                    name: c.to_string(),
                    available: headers.clone(),
                })
            }
        }
    }
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    let (mut read, mut dropped) = (0, 0);
    for rec in rdr.records() {
        let rec = rec?;
        read += 1;
        let row: Option<Vec<f64>> = index
            .iter()
            .map(|&i| {
                rec.get(i)
                    .and_then(|f| f.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
            })
            .collect();
        match row {
            Some(vals) => data.iter_mut().zip(vals).for_each(|(d, v)| d.push(v)),
            None => dropped += 1,
        }
    }
    if read == dropped {
        return Err(DatasetError::EmptyAfterFilter(
            columns.iter().map(|c| c.to_string()).collect(),
        ));
    }
    Ok(Dataset {
        source,
        columns: columns.iter().map(|c| c.to_string()).zip(data).collect(),
        rows_read: read,
        rows_dropped: dropped,
    })
}
