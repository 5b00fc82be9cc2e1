//! Airborne-fraction estimators.
//!
//! Every estimator regresses through the origin: the response is explained
//! by emissions (and optionally covariates) with no intercept. All of them
//! return an [`EstimateResult`] whose first coefficient is α.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dataset::{Dataset, DatasetError, LulccSource};
use crate::inference::{InferenceError, Interval};
use crate::numerics::{Matrix, NumericsError, Vector};

pub(crate) mod deming;
mod least_squares;

pub use deming::{deming_closed_form, deming_multivariate, deming_univariate};
pub use least_squares::{give, iv, ols, WEAK_INSTRUMENT_CORRELATION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("Deming estimator undefined: emissions are orthogonal to the response (eᵀg = 0)")]
    DegenerateCross,
    #[error("IV estimator undefined: instrument is orthogonal to the regressor (zᵀx = 0)")]
    ZeroCross,
    #[error("{rows} observations cannot identify {cols} coefficients")]
    RankError { rows: usize, cols: usize },
    #[error("order condition fails: {instruments} instruments for {regressors} regressors")]
    OrderCondition {
        instruments: usize,
        regressors: usize,
    },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("error-variance ratio must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error("invalid model specification: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    Ols,
    Deming,
    Iv,
    Give,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::Deming => "deming",
            Method::Iv => "iv",
            Method::Give => "give",
        }
    }
}

/// Divisor of the residual sum of squares in the OLS variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum VarianceDivisor {
    /// `1/T`, the same divisor the GIVE variance uses.
    #[default]
    Observations,
    /// `1/(T − k)`.
    DegreesOfFreedom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Confidence level of the Gaussian intervals.
    pub level: f64,
    pub ols_variance: VarianceDivisor,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            level: 0.95,
            ols_variance: VarianceDivisor::Observations,
        }
    }
}

/// Known ratio `δ = σ²_G / σ²_E` of response to regressor error variance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DemingConfig {
    delta: f64,
}

impl DemingConfig {
    pub fn new(delta: f64) -> Result<Self, EstimationError> {
        if delta > 0.0 && delta.is_finite() {
            Ok(DemingConfig { delta })
        } else {
            Err(EstimationError::InvalidDelta(delta))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Which observations an estimate was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleInfo {
    pub from: Option<i32>,
    pub to: Option<i32>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Warning {
    /// `|corr(z, x)|` fell below [`WEAK_INSTRUMENT_CORRELATION`].
    WeakInstrument { column: usize, correlation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateResult {
    pub method: Method,
    /// Airborne fraction.
    pub alpha_hat: f64,
    /// Covariate coefficients, in covariate order.
    pub gamma_hat: Vec<f64>,
    /// `None` for Deming until a bootstrap attaches one.
    pub se_alpha: Option<f64>,
    pub ci_alpha: Option<Interval>,
    pub sigma2_hat: f64,
    pub sample: SampleInfo,
    pub delta: Option<f64>,
    pub covariates: Vec<String>,
    pub instruments: Vec<String>,
    pub warnings: Vec<Warning>,
}

impl EstimateResult {
    pub(crate) fn new(
        method: Method,
        alpha_hat: f64,
        gamma_hat: Vec<f64>,
        sigma2_hat: f64,
        n: usize,
    ) -> Self {
        EstimateResult {
            method,
            alpha_hat,
            gamma_hat,
            se_alpha: None,
            ci_alpha: None,
            sigma2_hat,
            sample: SampleInfo {
                from: None,
                to: None,
                n,
            },
            delta: None,
            covariates: Vec::new(),
            instruments: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn with_uncertainty(mut self, se: f64, ci: Interval) -> Self {
        self.se_alpha = Some(se);
        self.ci_alpha = Some(ci);
        self
    }
}

/// Names of the series entering a regression.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub response: String,
    pub regressor: String,
    pub covariates: Vec<String>,
    pub instruments: Vec<String>,
}

impl ModelSpec {
    /// `G_t = α E_t + u_t`
    pub fn simple(source: LulccSource) -> Self {
        ModelSpec {
            response: "co2_growth".to_string(),
            regressor: source.emissions_name().to_string(),
            covariates: Vec::new(),
            instruments: Vec::new(),
        }
    }

    /// `G_t = α E_t + γ₁ ENSO_t + γ₂ VAI_t + u_t`
    pub fn extended(source: LulccSource) -> Self {
        ModelSpec {
            covariates: alloc::vec!["enso".to_string(), "vai".to_string()],
            ..Self::simple(source)
        }
    }

    /// Adds alternative emissions measurements as instruments.
    pub fn instrumented_by(mut self, sources: &[LulccSource]) -> Self {
        self.instruments = sources
            .iter()
            .map(|s| s.emissions_name().to_string())
            .collect();
        self
    }

    pub fn validate(&self) -> Result<(), EstimationError> {
        if self.covariates.contains(&self.regressor) {
            return Err(EstimationError::InvalidSpec(
                "regressor is listed as a covariate",
            ));
        }
        if self.instruments.contains(&self.response) {
            return Err(EstimationError::InvalidSpec(
                "response is listed as an instrument",
            ));
        }
        Ok(())
    }

    /// Pulls the spec's series out of a dataset.
    pub fn design(&self, data: &Dataset) -> Result<Design, EstimationError> {
        self.validate()?;
        let response = data.values(&self.response)?;
        let regressor = data.values(&self.regressor)?;
        let covariates = self.matrix(data, &self.covariates)?;
        let instruments = self.matrix(data, &self.instruments)?;
        let (from, to) = data.year_range();
        Ok(Design {
            response,
            regressor,
            covariates,
            instruments,
            sample: SampleInfo {
                from: Some(from),
                to: Some(to),
                n: data.len(),
            },
        })
    }

    fn matrix(&self, data: &Dataset, names: &[String]) -> Result<Option<Matrix>, EstimationError> {
        if names.is_empty() {
            return Ok(None);
        }
        let cols = names
            .iter()
            .map(|n| data.values(n))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        Ok(Some(Matrix::from_columns(&refs)?))
    }

    fn annotate(&self, mut r: EstimateResult, sample: SampleInfo) -> EstimateResult {
        r.sample = sample;
        r.covariates = self.covariates.clone();
        r
    }
}

/// Numeric inputs of one regression, aligned on the same years.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub response: Vector,
    pub regressor: Vector,
    pub covariates: Option<Matrix>,
    pub instruments: Option<Matrix>,
    pub sample: SampleInfo,
}

impl Design {
    /// `[E | W]`
    pub fn regressors(&self) -> Result<Matrix, EstimationError> {
        let e = Matrix::from_columns(&[&self.regressor])?;
        match &self.covariates {
            Some(w) => Ok(e.hstack(w)?),
            None => Ok(e),
        }
    }

    /// `[instruments | W]`: covariates act as their own instruments.
    pub fn instrument_matrix(&self) -> Result<Matrix, EstimationError> {
        let z = self
            .instruments
            .as_ref()
            .ok_or(EstimationError::InvalidSpec(
                "instrumental-variable methods need at least one instrument",
            ))?;
        match &self.covariates {
            Some(w) => Ok(z.hstack(w)?),
            None => Ok(z.clone()),
        }
    }
}

pub fn fit_ols(
    spec: &ModelSpec,
    data: &Dataset,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimationError> {
    let d = spec.design(data)?;
    let r = ols(&d.response, &d.regressors()?, opts)?;
    Ok(spec.annotate(r, d.sample))
}

pub fn fit_deming(
    spec: &ModelSpec,
    data: &Dataset,
    cfg: DemingConfig,
) -> Result<EstimateResult, EstimationError> {
    let d = spec.design(data)?;
    let r = match &d.covariates {
        Some(w) => deming_multivariate(&d.response, &d.regressor, w, cfg)?,
        None => deming_univariate(&d.response, &d.regressor, cfg)?,
    };
    Ok(spec.annotate(r, d.sample))
}

/// Single-instrument simple specifications use the scalar IV formula;
/// everything else goes through GIVE.
pub fn fit_iv(
    spec: &ModelSpec,
    data: &Dataset,
    opts: &EstimatorOptions,
) -> Result<EstimateResult, EstimationError> {
    let d = spec.design(data)?;
    let z = d.instrument_matrix()?;
    let mut r = if d.covariates.is_none() && z.cols() == 1 {
        iv(&d.response, &d.regressor, &z.column(0), opts)?
    } else {
        give(&d.response, &d.regressors()?, &z, opts)?
    };
    r.instruments = spec.instruments.clone();
    Ok(spec.annotate(r, d.sample))
}
