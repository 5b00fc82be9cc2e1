//! Result tables: one panel per sample with simple and extended columns.

use std::fmt::Write as _;
use std::str::FromStr;

use airborne_core::bootstrap::ResidualBootstrap;
use airborne_core::estimators::{fit_deming, fit_iv, fit_ols};
use airborne_core::{
    BootstrapConfig, BootstrapError, Dataset, DemingConfig, EstimateResult, EstimationError,
    EstimatorOptions, LulccSource, Method, ModelSpec,
};
use serde::{Deserialize, Serialize};

use crate::parallel;

pub const DEFAULT_DELTAS: [f64; 5] = [0.2, 0.5, 1.0, 2.0, 5.0];

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Bootstrap(#[from] BootstrapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Simple,
    Extended,
}

impl SpecKind {
    pub const BOTH: [SpecKind; 2] = [SpecKind::Simple, SpecKind::Extended];

    pub fn as_str(self) -> &'static str {
        match self {
            SpecKind::Simple => "simple",
            SpecKind::Extended => "extended",
        }
    }

    pub fn model(self, source: LulccSource) -> ModelSpec {
        match self {
            SpecKind::Simple => ModelSpec::simple(source),
            SpecKind::Extended => ModelSpec::extended(source),
        }
    }
}

/// Which bootstrap interval goes in the Deming rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DemingInterval {
    /// Percentiles of the replicate distribution.
    #[default]
    Percentile,
    /// `[α̂ − q(1 − a/2)·se, α̂ + q(a/2)·se]` taken literally.
    Scaled,
}

impl FromStr for DemingInterval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "percentile" => Ok(DemingInterval::Percentile),
            "scaled" => Ok(DemingInterval::Scaled),
            other => Err(format!(
                "unknown interval `{other}` (expected percentile or scaled)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub from: i32,
    pub to: i32,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma {
    pub enso: Option<f64>,
    pub vai: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapMeta {
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
}

/// One estimate, in the JSON row layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: Method,
    pub spec: SpecKind,
    pub sample: Sample,
    pub estimate: f64,
    pub se: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub gamma: Gamma,
    pub delta: Option<f64>,
    /// LULCC source keys of the instruments.
    pub instruments: Vec<String>,
    pub bootstrap: Option<BootstrapMeta>,
}

impl Row {
    fn from_estimate(r: &EstimateResult, spec: SpecKind, instruments: &[LulccSource]) -> Row {
        let coef = |name: &str| {
            r.covariates
                .iter()
                .position(|c| c == name)
                .map(|i| r.gamma_hat[i])
        };
        Row {
            method: r.method,
            spec,
            sample: Sample {
                from: r.sample.from.unwrap_or_default(),
                to: r.sample.to.unwrap_or_default(),
                n: r.sample.n,
            },
            estimate: r.alpha_hat,
            se: r.se_alpha,
            ci: r.ci_alpha.map(|c| [c.lo, c.hi]),
            gamma: Gamma {
                enso: coef("enso"),
                vai: coef("vai"),
            },
            delta: r.delta,
            instruments: instruments.iter().map(|s| s.key().to_string()).collect(),
            bootstrap: None,
        }
    }

    pub fn label(&self) -> String {
        match self.method {
            Method::Ols => "OLS".to_string(),
            Method::Iv | Method::Give => {
                let names: Vec<&str> = self
                    .instruments
                    .iter()
                    .map(|k| LulccSource::from_str(k).map_or(k.as_str(), |s| s.label()))
                    .collect();
                format!("IV ({})", names.join(", "))
            }
            Method::Deming => format!("Deming (δ = {})", self.delta.unwrap_or(f64::NAN)),
        }
    }
}

/// What one row estimates.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Ols,
    Iv(Vec<LulccSource>),
    Deming(f64),
}

#[derive(Debug, Clone)]
pub struct TableConfig {
    /// LULCC source of the regressor.
    pub source: LulccSource,
    pub deltas: Vec<f64>,
    /// `None` skips the Deming bootstrap.
    pub bootstrap: Option<BootstrapConfig>,
    pub estimator: EstimatorOptions,
    pub deming_interval: DemingInterval,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            source: LulccSource::Gcp,
            deltas: DEFAULT_DELTAS.to_vec(),
            bootstrap: None,
            estimator: EstimatorOptions::default(),
            deming_interval: DemingInterval::Percentile,
        }
    }
}

impl TableConfig {
    /// Instrument sets of the IV rows: each other source alone, then all of them.
    pub fn instrument_sets(&self) -> Vec<Vec<LulccSource>> {
        let others: Vec<LulccSource> = LulccSource::ALL
            .into_iter()
            .filter(|s| *s != self.source)
            .collect();
        let mut sets: Vec<Vec<LulccSource>> = others.iter().map(|s| vec![*s]).collect();
        sets.push(others);
        sets
    }

    pub fn estimators(&self) -> Vec<Estimator> {
        let mut out = vec![Estimator::Ols];
        out.extend(self.instrument_sets().into_iter().map(Estimator::Iv));
        out.extend(self.deltas.iter().map(|d| Estimator::Deming(*d)));
        out
    }
}

pub fn estimate_row(
    data: &Dataset,
    spec: SpecKind,
    estimator: &Estimator,
    cfg: &TableConfig,
) -> Result<Row, TableError> {
    let model = spec.model(cfg.source);
    match estimator {
        Estimator::Ols => Ok(Row::from_estimate(
            &fit_ols(&model, data, &cfg.estimator)?,
            spec,
            &[],
        )),
        Estimator::Iv(sources) => {
            let r = fit_iv(&model.instrumented_by(sources), data, &cfg.estimator)?;
            for w in &r.warnings {
                log::warn!("{spec:?} IV {sources:?}: {w:?}");
            }
            Ok(Row::from_estimate(&r, spec, sources))
        }
        Estimator::Deming(delta) => {
            let delta = DemingConfig::new(*delta)?;
            match cfg.bootstrap {
                None => Ok(Row::from_estimate(
                    &fit_deming(&model, data, delta)?,
                    spec,
                    &[],
                )),
                Some(boot_cfg) => {
                    let boot = ResidualBootstrap::for_spec(&model, data, delta, boot_cfg)?;
                    let result = parallel::run_bootstrap(&boot)?;
                    let mut row = Row::from_estimate(&result.estimate, spec, &[]);
                    let ci = match cfg.deming_interval {
                        DemingInterval::Percentile => result.percentile_ci,
                        DemingInterval::Scaled => result.scaled_ci,
                    };
                    row.ci = Some([ci.lo, ci.hi]);
                    row.bootstrap = Some(BootstrapMeta {
                        b: boot_cfg.replications(),
                        seed: boot_cfg.seed(),
                    });
                    Ok(row)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub title: String,
    pub sample: Sample,
    pub level: f64,
    pub bootstrap: Option<BootstrapMeta>,
    pub deltas: Vec<f64>,
    /// Simple rows first, then extended rows, each in estimator order.
    pub rows: Vec<Row>,
}

impl OutputTable {
    pub fn from_rows(title: impl Into<String>, rows: Vec<Row>, cfg: &TableConfig) -> OutputTable {
        let sample = rows.first().map_or(
            Sample {
                from: 0,
                to: 0,
                n: 0,
            },
            |r| r.sample,
        );
        OutputTable {
            title: title.into(),
            sample,
            level: cfg.estimator.level,
            bootstrap: cfg.bootstrap.map(|b| BootstrapMeta {
                b: b.replications(),
                seed: b.seed(),
            }),
            deltas: cfg.deltas.clone(),
            rows,
        }
    }

    fn specs(&self) -> Vec<SpecKind> {
        SpecKind::BOTH
            .into_iter()
            .filter(|s| self.rows.iter().any(|r| r.spec == *s))
            .collect()
    }
}

/// Both specifications at every estimator of `cfg`.
pub fn panel(
    data: &Dataset,
    title: impl Into<String>,
    cfg: &TableConfig,
) -> Result<OutputTable, TableError> {
    let estimators = cfg.estimators();
    let mut rows = Vec::with_capacity(2 * estimators.len());
    for spec in SpecKind::BOTH {
        for e in &estimators {
            rows.push(estimate_row(data, spec, e, cfg)?);
        }
    }
    Ok(OutputTable::from_rows(title, rows, cfg))
}

/// Four decimals, ties to even on the exact binary value.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "–".to_string(), fmt4)
}

fn interval(ci: Option<[f64; 2]>) -> String {
    ci.map_or_else(
        || "–".to_string(),
        |[lo, hi]| format!("[{}, {}]", fmt4(lo), fmt4(hi)),
    )
}

pub fn to_markdown(tables: &[OutputTable]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let specs = t.specs();
        let level = format!("{}%", (t.level * 1000.0).round() / 10.0);
        let _ = writeln!(
            out,
            "## {} ({}-{}, T = {})\n",
            t.title, t.sample.from, t.sample.to, t.sample.n
        );
        let mut header = String::from("| Model |");
        let mut rule = String::from("|---|");
        for s in &specs {
            let _ = write!(header, " {} | s.e. | {level} CI |", capitalise(s.as_str()));
            rule.push_str("---:|---:|---|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        let simple_rows: Vec<&Row> = t.rows.iter().filter(|r| r.spec == specs[0]).collect();
        for (k, first) in simple_rows.iter().enumerate() {
            let _ = write!(out, "| {} |", first.label());
            for s in &specs {
                match t.rows.iter().filter(|r| r.spec == *s).nth(k) {
                    Some(r) => {
                        let _ = write!(
                            out,
                            " {} | {} | {} |",
                            fmt4(r.estimate),
                            cell(r.se),
                            interval(r.ci)
                        );
                    }
                    None => out.push_str(" | | |"),
                }
            }
            out.push('\n');
        }
        if let Some(b) = t.bootstrap {
            let _ = writeln!(
                out,
                "\nDeming s.e. and intervals from {} residual-bootstrap replicates (seed {}).",
                b.b, b.seed
            );
        }
    }
    out
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

pub const CSV_HEADER: [&str; 18] = [
    "table",
    "label",
    "method",
    "spec",
    "from",
    "to",
    "n",
    "estimate",
    "se",
    "ci_lo",
    "ci_hi",
    "gamma_enso",
    "gamma_vai",
    "delta",
    "instruments",
    "level",
    "bootstrap_B",
    "bootstrap_seed",
];

/// Full-precision CSV, one line per row.
pub fn to_csv(tables: &[OutputTable]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    for t in tables {
        for r in &t.rows {
            w.write_record([
                t.title.clone(),
                r.label(),
                r.method.as_str().to_string(),
                r.spec.as_str().to_string(),
                r.sample.from.to_string(),
                r.sample.to.to_string(),
                r.sample.n.to_string(),
                r.estimate.to_string(),
                opt(r.se),
                opt(r.ci.map(|c| c[0])),
                opt(r.ci.map(|c| c[1])),
                opt(r.gamma.enso),
                opt(r.gamma.vai),
                opt(r.delta),
                r.instruments.join(";"),
                t.level.to_string(),
                r.bootstrap.map_or_else(String::new, |b| b.b.to_string()),
                r.bootstrap.map_or_else(String::new, |b| b.seed.to_string()),
            ])?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// All rows of all tables as one JSON array.
pub fn to_json(tables: &[OutputTable]) -> serde_json::Result<String> {
    let rows: Vec<&Row> = tables.iter().flat_map(|t| &t.rows).collect();
    serde_json::to_string_pretty(&rows)
}
