//! Annual carbon-cycle series and the transforms applied before estimation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::numerics::{self, Ldlt, Matrix, NumericsError, Projector, Vector};

/// Column names every dataset must carry, in file order.
pub const REQUIRED_SERIES: [&str; 7] = [
    "co2_growth",
    "emissions_ff",
    "lulcc_gcp",
    "lulcc_hc",
    "lulcc_vma",
    "enso",
    "vai",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("years are not contiguous: unexpected year {0}")]
    NonContiguousYears(i32),
    #[error("cannot parse value in row {row}, column `{column}`")]
    Parse { row: usize, column: String },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("requested years {from}-{to} are outside the data range {first}-{last}")]
    Range {
        from: i32,
        to: i32,
        first: i32,
        last: i32,
    },
    #[error("series `{name}` has {found} observations, at least {needed} required")]
    TooShort {
        name: String,
        needed: usize,
        found: usize,
    },
    #[error("series `{name}` covers {found} years, expected {expected}")]
    LengthMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("series `{0}` contains a non-finite value")]
    NonFinite(String),
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One named variable observed on consecutive years.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnualSeries {
    name: String,
    start_year: i32,
    values: Vector,
}

impl AnnualSeries {
    pub fn new(
        name: impl Into<String>,
        start_year: i32,
        values: Vec<f64>,
    ) -> Result<Self, DatasetError> {
        let name = name.into();
        if values.is_empty() {
            return Err(DatasetError::TooShort {
                name,
                needed: 1,
                found: 0,
            });
        }
        let values = Vector::new(values).map_err(|_| DatasetError::NonFinite(name.clone()))?;
        Ok(AnnualSeries {
            name,
            start_year,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.start_year + i as i32)
    }

    pub fn value_at(&self, year: i32) -> Option<f64> {
        let offset = usize::try_from(year.checked_sub(self.start_year)?).ok()?;
        self.values.get(offset).copied()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn slice_years(&self, from: i32, to: i32) -> AnnualSeries {
        let lo = (from - self.start_year) as usize;
        let hi = (to - self.start_year) as usize;
        AnnualSeries {
            name: self.name.clone(),
            start_year: from,
            values: Vector::from_vec_unchecked(self.values[lo..=hi].to_vec()),
        }
    }
}

/// Which land-use change estimate is added to fossil emissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum LulccSource {
    /// Global Carbon Project
    Gcp,
    /// Houghton & Castanho
    Hc,
    /// van Marle et al.
    Vma,
}

impl LulccSource {
    pub const ALL: [LulccSource; 3] = [LulccSource::Gcp, LulccSource::Hc, LulccSource::Vma];

    pub fn key(self) -> &'static str {
        match self {
            LulccSource::Gcp => "gcp",
            LulccSource::Hc => "hc",
            LulccSource::Vma => "vma",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LulccSource::Gcp => "GCP",
            LulccSource::Hc => "H&C",
            LulccSource::Vma => "vMa",
        }
    }

    pub fn lulcc_column(self) -> &'static str {
        match self {
            LulccSource::Gcp => "lulcc_gcp",
            LulccSource::Hc => "lulcc_hc",
            LulccSource::Vma => "lulcc_vma",
        }
    }

    /// Name of the derived emissions series, e.g. `emissions_hc`.
    pub fn emissions_name(self) -> &'static str {
        match self {
            LulccSource::Gcp => "emissions_gcp",
            LulccSource::Hc => "emissions_hc",
            LulccSource::Vma => "emissions_vma",
        }
    }
}

impl fmt::Display for LulccSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for LulccSource {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gcp" => Ok(LulccSource::Gcp),
            "hc" | "h&c" | "hn" | "h&n" => Ok(LulccSource::Hc),
            "vma" => Ok(LulccSource::Vma),
            other => Err(DatasetError::UnknownSeries(other.to_string())),
        }
    }
}

/// A set of series aligned on one contiguous year range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    series: BTreeMap<String, AnnualSeries>,
    first_year: i32,
    last_year: i32,
}

impl Dataset {
    /// Builds a dataset from a year column and named value columns.
    ///
    /// Years must be strictly consecutive and every name in
    /// [`REQUIRED_SERIES`] must be present. Additional columns are kept.
    pub fn from_columns(
        years: &[i32],
        columns: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, DatasetError> {
        let first = *years.first().ok_or(DatasetError::EmptyFile)?;
        for (i, &y) in years.iter().enumerate() {
            if y != first + i as i32 {
                return Err(DatasetError::NonContiguousYears(y));
            }
        }
        let series = columns
            .into_iter()
            .map(|(name, values)| {
                if values.len() != years.len() {
                    return Err(DatasetError::LengthMismatch {
                        name,
                        expected: years.len(),
                        found: values.len(),
                    });
                }
                AnnualSeries::new(name, first, values)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_series(series)
    }

    pub fn from_series(series: Vec<AnnualSeries>) -> Result<Self, DatasetError> {
        let head = series.first().ok_or(DatasetError::EmptyFile)?;
        let (first_year, last_year) = (head.start_year(), head.end_year());
        let expected = head.len();
        let mut map = BTreeMap::new();
        for s in series {
            if s.start_year() != first_year || s.len() != expected {
                return Err(DatasetError::LengthMismatch {
                    name: s.name.clone(),
                    expected,
                    found: s.len(),
                });
            }
            map.insert(s.name.clone(), s);
        }
        for name in REQUIRED_SERIES {
            if !map.contains_key(name) {
                return Err(DatasetError::MissingColumn(name.to_string()));
            }
        }
        Ok(Dataset {
            series: map,
            first_year,
            last_year,
        })
    }

    pub fn year_range(&self) -> (i32, i32) {
        (self.first_year, self.last_year)
    }

    pub fn len(&self) -> usize {
        (self.last_year - self.first_year + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first_year..=self.last_year
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    /// A stored series, or a derived `emissions_<source>` series.
    pub fn series(&self, name: &str) -> Result<AnnualSeries, DatasetError> {
        if let Some(s) = self.series.get(name) {
            return Ok(s.clone());
        }
        LulccSource::ALL
            .into_iter()
            .find(|src| src.emissions_name() == name)
            .map(|src| self.emissions(src))
            .ok_or_else(|| DatasetError::UnknownSeries(name.to_string()))
    }

    pub fn values(&self, name: &str) -> Result<Vector, DatasetError> {
        self.series(name).map(|s| s.values.clone())
    }

    fn stored(&self, name: &str) -> &AnnualSeries {
        // required series are checked at construction
        &self.series[name]
    }

    /// Total emissions `E^FF + E^LULCC` for the chosen land-use source.
    pub fn emissions(&self, source: LulccSource) -> AnnualSeries {
        let ff = self.stored("emissions_ff");
        let lulcc = self.stored(source.lulcc_column());
        let values = ff
            .values
            .iter()
            .zip(lulcc.values.iter())
            .map(|(a, b)| a + b)
            .collect();
        AnnualSeries {
            name: source.emissions_name().to_string(),
            start_year: self.first_year,
            values: Vector::from_vec_unchecked(values),
        }
    }

    /// Restricts every series to `from..=to`.
    pub fn subset(&self, from: i32, to: i32) -> Result<Dataset, DatasetError> {
        if from > to || from < self.first_year || to > self.last_year {
            return Err(DatasetError::Range {
                from,
                to,
                first: self.first_year,
                last: self.last_year,
            });
        }
        Ok(Dataset {
            series: self
                .series
                .iter()
                .map(|(k, s)| (k.clone(), s.slice_years(from, to)))
                .collect(),
            first_year: from,
            last_year: to,
        })
    }

    /// Replaces (or adds) a series covering the same years.
    pub fn with_series(&self, series: AnnualSeries) -> Result<Dataset, DatasetError> {
        if series.start_year() != self.first_year || series.len() != self.len() {
            return Err(DatasetError::LengthMismatch {
                name: series.name.clone(),
                expected: self.len(),
                found: series.len(),
            });
        }
        let mut out = self.clone();
        out.series.insert(series.name.clone(), series);
        Ok(out)
    }

    /// Dataset whose `enso` column is replaced by its detrended version.
    pub fn with_detrended_enso(&self) -> Result<Dataset, DatasetError> {
        let detrended = detrend(self.stored("enso"))?.renamed("enso");
        self.with_series(detrended)
    }
}

fn trend_design(n: usize) -> Matrix {
    let ones = alloc::vec![1.0; n];
    let index: Vec<f64> = (0..n).map(|t| t as f64).collect();
    // both columns have equal length
    Matrix::from_columns(&[&ones, &index]).expect("trend design")
}

/// Residuals from a least-squares fit on an intercept and the year index `0..T`.
pub fn detrend(s: &AnnualSeries) -> Result<AnnualSeries, DatasetError> {
    if s.len() < 3 {
        return Err(DatasetError::TooShort {
            name: s.name.clone(),
            needed: 3,
            found: s.len(),
        });
    }
    let design = trend_design(s.len());
    let residuals = Projector::new(&design)?.annihilate(&s.values)?;
    Ok(AnnualSeries {
        name: format!("{}_detrended", s.name),
        start_year: s.start_year,
        values: residuals,
    })
}

/// Classical trend regression `y_t = a + b·t + e_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrendTestResult {
    /// Estimated change per year.
    pub slope: f64,
    pub t_stat: f64,
    /// Two-sided, Student-t with `T − 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

pub fn trend_test(s: &AnnualSeries) -> Result<TrendTestResult, DatasetError> {
    let n = s.len();
    if n < 4 {
        return Err(DatasetError::TooShort {
            name: s.name.clone(),
            needed: 4,
            found: n,
        });
    }
    let y = s.values();
    if y.iter().all(|&v| v == y[0]) {
        return Ok(TrendTestResult {
            slope: 0.0,
            t_stat: 0.0,
            p_value: 1.0,
            n,
        });
    }
    let design = trend_design(n);
    let normal = Ldlt::factor(&numerics::gram(&design)?)?;
    let coef = normal.solve(&design.t_mul_vec(y)?)?;
    let fitted = design.mul_vec(&coef)?;
    let rss: f64 = y
        .iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let df = (n - 2) as f64;
    let se = libm::sqrt(rss / df * normal.inverse_diagonal(1));
    let slope = coef[1];
    let t_stat = if se > 0.0 {
        slope / se
    } else {
        f64::INFINITY.copysign(slope)
    };
    Ok(TrendTestResult {
        slope,
        t_stat,
        p_value: numerics::student_t_two_sided_p(t_stat, df),
        n,
    })
}
