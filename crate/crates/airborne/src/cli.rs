//! Command-line definitions and command runners.

use std::path::PathBuf;
use std::str::FromStr;

use airborne_core::dataset::trend_test;
use airborne_core::simulate::SimulationError;
use airborne_core::{
    BiasReport, BootstrapConfig, Dataset, DatasetError, EStarProcess, EstimationError,
    EstimatorOptions, LulccSource, SyntheticConfig, VarianceDivisor,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::io::{load_csv, LoadError};
use crate::parallel;
use crate::plot::{emit_plot_data, PlotError};
use crate::table::{
    self, DemingInterval, Estimator, OutputTable, SpecKind, TableConfig, TableError,
};

#[derive(Debug, Parser)]
#[command(
    name = "airborne",
    version,
    about = "Airborne-fraction estimation under measurement error"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one estimator on one specification.
    Estimate(EstimateArgs),
    /// Full-sample and recent-subsample tables of every estimator.
    Replicate(ReplicateArgs),
    /// Monte-Carlo study of OLS, IV and Deming under measurement error.
    Simulate(SimulateArgs),
    /// Linear trend test for one series.
    Trendtest(TrendArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long, default_value = "data/airborne.csv")]
    pub data: PathBuf,
    #[arg(long)]
    pub from: Option<i32>,
    #[arg(long)]
    pub to: Option<i32>,
    /// Replace ENSO by its residual from a linear trend (fitted on the whole file).
    #[arg(long)]
    pub detrend_enso: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InferenceArgs {
    /// LULCC source of the regressor.
    #[arg(long, default_value = "gcp", value_parser = LulccSource::from_str)]
    pub lulcc: LulccSource,
    /// Deming bootstrap replicates; 0 disables the bootstrap.
    #[arg(long, default_value_t = 9999)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 20220101)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// OLS residual variance with divisor T − k instead of T.
    #[arg(long)]
    pub dof_correction: bool,
    /// Interval reported for Deming rows.
    #[arg(long, default_value = "percentile", value_parser = DemingInterval::from_str)]
    pub deming_ci: DemingInterval,
    /// Worker threads for the bootstrap (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
    /// Directory for tidy CSV files of the plotted series.
    #[arg(long)]
    pub emit_plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecArg {
    Simple,
    Extended,
}

impl From<SpecArg> for SpecKind {
    fn from(s: SpecArg) -> Self {
        match s {
            SpecArg::Simple => SpecKind::Simple,
            SpecArg::Extended => SpecKind::Extended,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ols,
    Deming,
    Iv,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub inference: InferenceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, default_value_t = SpecArg::Simple)]
    pub spec: SpecArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Ols)]
    pub method: MethodArg,
    /// Instrument sources for IV, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = LulccSource::from_str)]
    pub instruments: Vec<LulccSource>,
    /// Error-variance ratio for Deming.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplicateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub inference: InferenceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// First year of the recent-subsample table.
    #[arg(long, default_value_t = 1992)]
    pub recent_from: i32,
    /// Deming error-variance ratios, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = table::DEFAULT_DELTAS)]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    LinearRamp,
    RandomWalk,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.45)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_eta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma_u: f64,
    #[arg(long, default_value_t = 0.2)]
    pub sigma_omega: f64,
    /// Coefficients on synthetic ENSO and VAI; either one switches covariates on.
    #[arg(long)]
    pub gamma_enso: Option<f64>,
    #[arg(long)]
    pub gamma_vai: Option<f64>,
    /// Observations per replication.
    #[arg(long = "T", default_value_t = 64)]
    pub t: usize,
    /// Replications.
    #[arg(long = "R", default_value_t = 1000)]
    pub r: usize,
    #[arg(long, default_value_t = 20220101)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ProcessArg::LinearRamp)]
    pub process: ProcessArg,
    /// Linear ramp: E*_t = intercept + slope·t.
    #[arg(long, default_value_t = 2.5)]
    pub intercept: f64,
    #[arg(long, default_value_t = 0.12)]
    pub slope: f64,
    /// Random walk: E*_0 = start, steps drift + step_sd·N(0, 1).
    #[arg(long, default_value_t = 2.5)]
    pub start: f64,
    #[arg(long, default_value_t = 0.12)]
    pub drift: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step_sd: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TrendArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "enso")]
    pub series: String,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Output(_) => 1,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::Dataset(d) => d.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Estimation(e) => e.into(),
            TableError::Bootstrap(airborne_core::BootstrapError::Estimation(e)) => e.into(),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::InvalidConfig(msg) => CliError::Usage(msg.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<PlotError> for CliError {
    fn from(e: PlotError) -> Self {
        CliError::Output(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn output(e: impl std::fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}

fn check_threads(threads: Option<usize>) -> Result<(), CliError> {
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(())
}

impl DataArgs {
    /// Full file, after the optional ENSO detrending.
    pub fn load_full(&self) -> Result<Dataset, CliError> {
        if let (Some(f), Some(t)) = (self.from, self.to) {
            if f > t {
                return Err(usage(format!("--from {f} is after --to {t}")));
            }
        }
        let data = load_csv(&self.data)?;
        Ok(if self.detrend_enso {
            data.with_detrended_enso()?
        } else {
            data
        })
    }

    pub fn select(&self, full: &Dataset, from: Option<i32>) -> Result<Dataset, CliError> {
        let (first, last) = full.year_range();
        Ok(full.subset(from.or(self.from).unwrap_or(first), self.to.unwrap_or(last))?)
    }
}

impl InferenceArgs {
    pub fn table_config(&self) -> Result<TableConfig, CliError> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(usage(format!(
                "--level must lie in (0, 1), got {}",
                self.level
            )));
        }
        check_threads(self.threads)?;
        let bootstrap = match self.bootstrap {
            0 => None,
            1 => return Err(usage("--bootstrap must be 0 (disabled) or at least 2")),
            b => Some(
                BootstrapConfig::new(b, self.seed, self.level).map_err(|e| usage(e.to_string()))?,
            ),
        };
        Ok(TableConfig {
            source: self.lulcc,
            deltas: table::DEFAULT_DELTAS.to_vec(),
            bootstrap,
            estimator: EstimatorOptions {
                level: self.level,
                ols_variance: if self.dof_correction {
                    VarianceDivisor::DegreesOfFreedom
                } else {
                    VarianceDivisor::Observations
                },
            },
            deming_interval: self.deming_ci,
        })
    }
}

fn render(tables: &[OutputTable], format: Format) -> Result<String, CliError> {
    match format {
        Format::Md => Ok(table::to_markdown(tables)),
        Format::Csv => table::to_csv(tables).map_err(output),
        Format::Json => table::to_json(tables).map(|s| s + "\n").map_err(output),
    }
}

fn threads<T: Send>(n: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    parallel::with_threads(n, f).map_err(output)
}

pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a),
        Command::Replicate(a) => cmd_replicate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Trendtest(a) => cmd_trendtest(&a),
    }
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<String, CliError> {
    let estimator = match a.method {
        MethodArg::Ols => Estimator::Ols,
        MethodArg::Iv => {
            if a.instruments.is_empty() {
                return Err(usage(
                    "instruments required for --method iv (e.g. --instruments hc,vma)",
                ));
            }
            if a.instruments.contains(&a.inference.lulcc) {
                return Err(usage(
                    "an instrument cannot be the regressor's own LULCC source",
                ));
            }
            Estimator::Iv(a.instruments.clone())
        }
        MethodArg::Deming => {
            let d = a
                .delta
                .ok_or_else(|| usage("delta required for --method deming"))?;
            if !(d > 0.0 && d.is_finite()) {
                return Err(usage(format!(
                    "--delta must be positive and finite, got {d}"
                )));
            }
            Estimator::Deming(d)
        }
    };
    let cfg = a.inference.table_config()?;
    let full = a.data.load_full()?;
    let data = a.data.select(&full, None)?;
    let row = threads(a.inference.threads, || {
        table::estimate_row(&data, a.spec.into(), &estimator, &cfg)
    })??;
    let tables = vec![OutputTable::from_rows("Estimate", vec![row], &cfg)];
    if let Some(dir) = &a.output.emit_plot_data {
        emit_plot_data(dir, &data, &tables)?;
    }
    render(&tables, a.output.format)
}

pub fn cmd_replicate(a: &ReplicateArgs) -> Result<String, CliError> {
    let mut cfg = a.inference.table_config()?;
    if a.deltas.is_empty() || a.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(usage("--deltas must be positive and finite"));
    }
    cfg.deltas = a.deltas.clone();
    let full = a.data.load_full()?;
    let main = a.data.select(&full, None)?;
    let (main_from, main_to) = main.year_range();
    let recent_from = a.recent_from.max(main_from);
    if recent_from > main_to {
        return Err(usage(format!(
            "--recent-from {} is after the last year {main_to}",
            a.recent_from
        )));
    }
    let recent = a.data.select(&full, Some(recent_from))?;
    let tables = threads(
        a.inference.threads,
        || -> Result<Vec<OutputTable>, TableError> {
            Ok(vec![
                table::panel(&main, "Full sample", &cfg)?,
                table::panel(&recent, "Recent subsample", &cfg)?,
            ])
        },
    )??;
    if let Some(dir) = &a.output.emit_plot_data {
        emit_plot_data(dir, &main, &tables)?;
    }
    render(&tables, a.output.format)
}

impl SimulateArgs {
    pub fn config(&self) -> SyntheticConfig {
        SyntheticConfig {
            t: self.t,
            alpha_true: self.alpha,
            gamma_true: (self.gamma_enso.is_some() || self.gamma_vai.is_some()).then(|| {
                (
                    self.gamma_enso.unwrap_or(0.0),
                    self.gamma_vai.unwrap_or(0.0),
                )
            }),
            sigma_u: self.sigma_u,
            sigma_omega: self.sigma_omega,
            sigma_eta: self.sigma_eta,
            sigma_kappa: self.sigma_kappa,
            e_star_process: match self.process {
                ProcessArg::LinearRamp => EStarProcess::LinearRamp {
                    intercept: self.intercept,
                    slope: self.slope,
                },
                ProcessArg::RandomWalk => EStarProcess::RandomWalkDrift {
                    start: self.start,
                    drift: self.drift,
                    step_sd: self.step_sd,
                },
            },
            seed: self.seed,
        }
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    check_threads(a.threads)?;
    let cfg = a.config();
    let report = threads(a.threads, || parallel::monte_carlo(&cfg, a.r))??;
    render_report(&report, a.format)
}

pub fn render_report(r: &BiasReport, format: Format) -> Result<String, CliError> {
    let rows = [("ols", r.ols), ("iv", r.iv), ("deming", r.deming)];
    match format {
        Format::Json => serde_json::to_string_pretty(r)
            .map(|s| s + "\n")
            .map_err(output),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "estimator",
                "mean",
                "bias",
                "sd",
                "mc_se",
                "alpha",
                "predicted_ols",
                "attenuation_factor",
            ])
            .map_err(output)?;
            for (name, s) in rows {
                w.write_record([
                    name.to_string(),
                    s.mean.to_string(),
                    (s.mean - r.alpha_true).to_string(),
                    s.sd.to_string(),
                    s.mc_se.to_string(),
                    r.alpha_true.to_string(),
                    r.predicted_ols.to_string(),
                    r.attenuation_factor.to_string(),
                ])
                .map_err(output)?;
            }
            String::from_utf8(w.into_inner().map_err(output)?).map_err(output)
        }
        Format::Md => {
            let c = &r.config;
            let delta = r
                .delta_true
                .map_or_else(|| "∞".to_string(), |d| format!("{d:.4}"));
            let mut out = format!(
                "## Monte-Carlo study (T = {}, R = {}, seed {})\n\n\
                 α = {}, σ_η = {}, σ_κ = {}, σ_u = {}, σ_ω = {}, Deming δ = {delta}\n\n\
                 Attenuation factor {}; predicted OLS mean {}\n\n\
                 | Estimator | Mean | Bias | s.d. | MC s.e. |\n|---|---:|---:|---:|---:|\n",
                c.t,
                r.replications,
                c.seed,
                c.alpha_true,
                c.sigma_eta,
                c.sigma_kappa,
                c.sigma_u,
                c.sigma_omega,
                table::fmt4(r.attenuation_factor),
                table::fmt4(r.predicted_ols),
            );
            for (name, s) in rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} |\n",
                    name.to_uppercase().replace("DEMING", "Deming"),
                    table::fmt4(s.mean),
                    table::fmt4(s.mean - r.alpha_true),
                    table::fmt4(s.sd),
                    table::fmt4(s.mc_se)
                ));
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub series: String,
    pub from: i32,
    pub to: i32,
    pub n: usize,
    pub slope: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

pub fn trend_report(data: &Dataset, series: &str) -> Result<TrendReport, CliError> {
    let s = data.series(series)?;
    let r = trend_test(&s)?;
    Ok(TrendReport {
        series: series.to_string(),
        from: s.start_year(),
        to: s.end_year(),
        n: r.n,
        slope: r.slope,
        t_stat: r.t_stat,
        p_value: r.p_value,
    })
}

pub fn cmd_trendtest(a: &TrendArgs) -> Result<String, CliError> {
    let full = a.data.load_full()?;
    let data = a.data.select(&full, None)?;
    let r = trend_report(&data, &a.series)?;
    match a.format {
        Format::Json => serde_json::to_string_pretty(&r).map(|s| s + "\n").map_err(output),
        Format::Csv => Ok(format!(
            "series,from,to,n,slope,t_stat,p_value\n{},{},{},{},{},{},{}\n",
            r.series, r.from, r.to, r.n, r.slope, r.t_stat, r.p_value
        )),
        Format::Md => Ok(format!(
            "| Series | Years | Slope | t | p-value |\n|---|---|---:|---:|---:|\n| {} | {}-{} | {} | {} | {} |\n",
            r.series,
            r.from,
            r.to,
            table::fmt4(r.slope),
            table::fmt4(r.t_stat),
            table::fmt4(r.p_value)
        )),
    }
}
