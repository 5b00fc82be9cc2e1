//! CSV reading and writing for annual datasets.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use airborne_core::dataset::REQUIRED_SERIES;
use airborne_core::{Dataset, DatasetError};

pub const YEAR_COLUMN: &str = "year";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, LoadError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file)
}

/// Parses `year` plus the required series. Columns may appear in any order;
/// unknown columns are skipped with a warning. Row numbers in errors count
/// the header as row 1.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset, LoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(DatasetError::EmptyFile.into());
    }
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let year_idx = position(YEAR_COLUMN)?;
    let value_idx = REQUIRED_SERIES
        .iter()
        .map(|n| position(n))
        .collect::<Result<Vec<_>, _>>()?;
    for h in headers.iter() {
        if h != YEAR_COLUMN && !REQUIRED_SERIES.contains(&h) {
            log::warn!("ignoring unknown column `{h}`");
        }
    }

    let mut years = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); REQUIRED_SERIES.len()];
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let cell = |idx: usize| record.get(idx).unwrap_or("");
        let year = cell(year_idx)
            .parse::<i32>()
            .map_err(|_| DatasetError::Parse {
                row,
                column: YEAR_COLUMN.to_string(),
            })?;
        years.push(year);
        for (col, (&idx, name)) in columns
            .iter_mut()
            .zip(value_idx.iter().zip(REQUIRED_SERIES))
        {
            let v = cell(idx)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetError::Parse {
                    row,
                    column: name.to_string(),
                })?;
            col.push(v);
        }
    }
    if years.is_empty() {
        return Err(DatasetError::EmptyFile.into());
    }
    let named = REQUIRED_SERIES
        .iter()
        .map(|n| n.to_string())
        .zip(columns)
        .collect();
    Ok(Dataset::from_columns(&years, named)?)
}

/// Writes `year` and the required series in canonical column order, with
/// shortest round-trip float formatting.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<(), LoadError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![YEAR_COLUMN];
    header.extend(REQUIRED_SERIES);
    w.write_record(&header)?;
    let columns = REQUIRED_SERIES
        .iter()
        .map(|n| data.values(n))
        .collect::<Result<Vec<_>, _>>()?;
    for (t, year) in data.years().enumerate() {
        let mut rec = vec![year.to_string()];
        rec.extend(columns.iter().map(|c| c[t].to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
