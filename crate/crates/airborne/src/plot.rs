//! Tidy CSV files for external plotting.

use std::fs;
use std::path::{Path, PathBuf};

use airborne_core::{Dataset, LulccSource};

use crate::table::OutputTable;

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("cannot write plot data to {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dataset(#[from] airborne_core::DatasetError),
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>, PlotError> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|source| PlotError::Io { path, source })?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes `emissions.csv` (the three total-emissions variants and fossil
/// emissions), `series.csv` (every stored column) and, when tables are given,
/// `estimates.csv`. Returns the files written.
pub fn emit_plot_data(
    dir: &Path,
    data: &Dataset,
    tables: &[OutputTable],
) -> Result<Vec<PathBuf>, PlotError> {
    fs::create_dir_all(dir).map_err(|source| PlotError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let mut w = writer(dir, "emissions.csv")?;
    w.write_record(["year", "source", "value"])?;
    let fossil = data.values("emissions_ff")?;
    let totals: Vec<_> = LulccSource::ALL
        .iter()
        .map(|s| (s.label(), data.emissions(*s)))
        .collect();
    for (t, year) in data.years().enumerate() {
        w.write_record([year.to_string(), "fossil".into(), fossil[t].to_string()])?;
        for (label, series) in &totals {
            w.write_record([
                year.to_string(),
                label.to_string(),
                series.values()[t].to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    written.push(dir.join("emissions.csv"));

    let mut w = writer(dir, "series.csv")?;
    w.write_record(["year", "series", "value"])?;
    let names: Vec<String> = data.names().map(str::to_string).collect();
    let columns = names
        .iter()
        .map(|n| data.values(n))
        .collect::<Result<Vec<_>, _>>()?;
    for (t, year) in data.years().enumerate() {
        for (name, col) in names.iter().zip(&columns) {
            w.write_record([year.to_string(), name.clone(), col[t].to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    written.push(dir.join("series.csv"));

    if !tables.is_empty() {
        let mut w = writer(dir, "estimates.csv")?;
        w.write_record(["table", "spec", "label", "estimate", "ci_lo", "ci_hi"])?;
        for t in tables {
            for r in &t.rows {
                let (lo, hi) = r.ci.map_or((String::new(), String::new()), |[l, h]| {
                    (l.to_string(), h.to_string())
                });
                w.write_record([
                    t.title.clone(),
                    r.spec.as_str().into(),
                    r.label(),
                    r.estimate.to_string(),
                    lo,
                    hi,
                ])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        written.push(dir.join("estimates.csv"));
    }
    Ok(written)
}
