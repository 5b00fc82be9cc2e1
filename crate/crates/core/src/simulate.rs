//! Synthetic measurement-error data and Monte-Carlo bias studies.
//!
//! The generator follows the errors-in-variables setup: true emissions `E*`
//! are observed twice with independent errors, `E₁ = E* + η` and
//! `E₂ = E* + κ`, and the response is `G = αE* + γᵀw + u + ω`. Every error
//! source draws from its own [`Stream`], so changing one standard deviation
//! never perturbs another source's draws.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::estimators::deming::deming_with_projector;
use crate::estimators::{
    deming_closed_form, give, iv, ols, DemingConfig, EstimationError, EstimatorOptions,
};
use crate::numerics::{dot, sum_of_squares, Matrix, Projector, Vector};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

/// How the true emissions path `E*_t` is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EStarProcess {
    /// `E*_t = intercept + slope·t`
    LinearRamp { intercept: f64, slope: f64 },
    /// `E*_0 = start`, `E*_t = E*_{t−1} + drift + step_sd·ε_t`
    RandomWalkDrift {
        start: f64,
        drift: f64,
        step_sd: f64,
    },
}

impl Default for EStarProcess {
    fn default() -> Self {
        EStarProcess::LinearRamp {
            intercept: 2.5,
            slope: 0.12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticConfig {
    pub t: usize,
    pub alpha_true: f64,
    /// Coefficients on the synthetic ENSO and VAI covariates.
    pub gamma_true: Option<(f64, f64)>,
    /// Structural error `u`.
    pub sigma_u: f64,
    /// Response measurement error `ω`.
    pub sigma_omega: f64,
    /// Error `η` on the regressor `E₁`.
    pub sigma_eta: f64,
    /// Error `κ` on the instrument `E₂`.
    pub sigma_kappa: f64,
    pub e_star_process: EStarProcess,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            t: 64,
            alpha_true: 0.45,
            gamma_true: None,
            sigma_u: 0.5,
            sigma_omega: 0.2,
            sigma_eta: 0.5,
            sigma_kappa: 0.5,
            e_star_process: EStarProcess::default(),
            seed: 20220101,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.t < 2 {
            return Err(SimulationError::InvalidConfig(
                "sample size must be at least 2",
            ));
        }
        let sds = [
            self.sigma_u,
            self.sigma_omega,
            self.sigma_eta,
            self.sigma_kappa,
        ];
        if !sds.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            return Err(SimulationError::InvalidConfig(
                "standard deviations must be finite and non-negative",
            ));
        }
        if let EStarProcess::RandomWalkDrift { step_sd, .. } = self.e_star_process {
            if !(step_sd >= 0.0 && step_sd.is_finite()) {
                return Err(SimulationError::InvalidConfig(
                    "random-walk step sd must be finite and non-negative",
                ));
            }
        }
        if !self.alpha_true.is_finite() {
            return Err(SimulationError::InvalidConfig("alpha must be finite"));
        }
        Ok(())
    }

    /// `δ = σ²_G / σ²_E` implied by the config, with `σ²_G = σ²_u + σ²_ω`
    /// and `σ²_E = σ²_η`. Infinite when `σ_η = 0`.
    pub fn true_delta(&self) -> f64 {
        let num = self.sigma_u * self.sigma_u + self.sigma_omega * self.sigma_omega;
        let den = self.sigma_eta * self.sigma_eta;
        if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticData {
    pub e_star: Vector,
    /// Regressor measurement `E* + η`.
    pub e1: Vector,
    /// Instrument measurement `E* + κ`.
    pub e2: Vector,
    pub g: Vector,
    pub enso: Vector,
    pub vai: Vector,
}

fn gaussian(seed: u64, stream: Stream, index: u64, n: usize, sd: f64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream, index);
    (0..n)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticData, SimulationError> {
    generate_replication(cfg, 0)
}

/// Dataset number `replication` of a Monte-Carlo study.
pub fn generate_replication(
    cfg: &SyntheticConfig,
    replication: u64,
) -> Result<SyntheticData, SimulationError> {
    cfg.validate()?;
    let (n, seed, r) = (cfg.t, cfg.seed, replication);
    let e_star: Vec<f64> = match cfg.e_star_process {
        EStarProcess::LinearRamp { intercept, slope } => {
            (0..n).map(|t| intercept + slope * t as f64).collect()
        }
        EStarProcess::RandomWalkDrift {
            start,
            drift,
            step_sd,
        } => {
            let steps = gaussian(seed, Stream::TrueEmissions, r, n, step_sd);
            let mut level = start;
            let mut path = Vec::with_capacity(n);
            for (t, step) in steps.into_iter().enumerate() {
                if t > 0 {
                    level += drift + step;
                }
                path.push(level);
            }
            path
        }
    };
    let eta = gaussian(seed, Stream::RegressorError, r, n, cfg.sigma_eta);
    let kappa = gaussian(seed, Stream::InstrumentError, r, n, cfg.sigma_kappa);
    let u = gaussian(seed, Stream::StructuralError, r, n, cfg.sigma_u);
    let omega = gaussian(seed, Stream::ResponseError, r, n, cfg.sigma_omega);
    let enso = gaussian(seed, Stream::Enso, r, n, 1.0);
    let vai = gaussian(seed, Stream::Vai, r, n, 1.0);

    let (g1, g2) = cfg.gamma_true.unwrap_or((0.0, 0.0));
    let mut g = Vec::with_capacity(n);
    for t in 0..n {
        let mut v = cfg.alpha_true * e_star[t] + u[t] + omega[t];
        if cfg.gamma_true.is_some() {
            v += g1 * enso[t] + g2 * vai[t];
        }
        g.push(v);
    }
    let e1 = e_star.iter().zip(&eta).map(|(a, b)| a + b).collect();
    let e2 = e_star.iter().zip(&kappa).map(|(a, b)| a + b).collect();
    let vector = |v: Vec<f64>| {
        Vector::new(v).map_err(|_| SimulationError::InvalidConfig("generated a non-finite value"))
    };
    Ok(SyntheticData {
        e_star: vector(e_star)?,
        e1: vector(e1)?,
        e2: vector(e2)?,
        g: vector(g)?,
        enso: vector(enso)?,
        vai: vector(vai)?,
    })
}

/// Large-sample OLS shrinkage `m₂ / (m₂ + σ²_η)` with `m₂ = (1/T) Σ E*²`.
pub fn attenuation_factor(e_star: &[f64], sigma_eta: f64) -> f64 {
    let m2 = sum_of_squares(e_star) / e_star.len() as f64;
    m2 / (m2 + sigma_eta * sigma_eta)
}

/// Estimates from one synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicationEstimates {
    pub ols: f64,
    pub iv: f64,
    pub deming: f64,
    pub attenuation_factor: f64,
}

/// OLS of `g` on `E₁`, IV with `E₂` instrumenting `E₁`, and Deming at the
/// config's true `δ`. Covariates enter all three when `gamma_true` is set.
pub fn estimate_replication(
    cfg: &SyntheticConfig,
    replication: u64,
) -> Result<ReplicationEstimates, SimulationError> {
    let data = generate_replication(cfg, replication)?;
    let opts = EstimatorOptions::default();
    let delta = cfg.true_delta();
    let (ols_hat, iv_hat, deming_hat) = match cfg.gamma_true {
        None => {
            let x = Matrix::from_columns(&[&data.e1]).map_err(EstimationError::from)?;
            let ols_hat = ols(&data.g, &x, &opts)?.alpha_hat;
            let iv_hat = iv(&data.g, &data.e1, &data.e2, &opts)?.alpha_hat;
            let deming_hat = deming_at_limit(
                sum_of_squares(&data.g),
                sum_of_squares(&data.e1),
                dot(&data.e1, &data.g),
                delta,
            )?;
            (ols_hat, iv_hat, deming_hat)
        }
        Some(_) => {
            let w =
                Matrix::from_columns(&[&data.enso, &data.vai]).map_err(EstimationError::from)?;
            let e1 = Matrix::from_columns(&[&data.e1]).map_err(EstimationError::from)?;
            let e2 = Matrix::from_columns(&[&data.e2]).map_err(EstimationError::from)?;
            let x = e1.hstack(&w).map_err(EstimationError::from)?;
            let z = e2.hstack(&w).map_err(EstimationError::from)?;
            let ols_hat = ols(&data.g, &x, &opts)?.alpha_hat;
            let iv_hat = give(&data.g, &x, &z, &opts)?.alpha_hat;
            let projector = Projector::new(&w).map_err(EstimationError::from)?;
            let deming_hat = if delta.is_finite() && delta > 0.0 {
                deming_with_projector(&data.g, &data.e1, &projector, DemingConfig::new(delta)?)?
                    .alpha_hat
            } else {
                let g = projector
                    .annihilate(&data.g)
                    .map_err(EstimationError::from)?;
                let e = projector
                    .annihilate(&data.e1)
                    .map_err(EstimationError::from)?;
                deming_at_limit(sum_of_squares(&g), sum_of_squares(&e), dot(&e, &g), delta)?
            };
            (ols_hat, iv_hat, deming_hat)
        }
    };
    Ok(ReplicationEstimates {
        ols: ols_hat,
        iv: iv_hat,
        deming: deming_hat,
        attenuation_factor: attenuation_factor(&data.e_star, cfg.sigma_eta),
    })
}

// δ = ∞ is least squares of g on e; δ = 0 is the reverse regression.
fn deming_at_limit(gg: f64, ee: f64, eg: f64, delta: f64) -> Result<f64, EstimationError> {
    if delta.is_infinite() {
        Ok(eg / ee)
    } else if delta == 0.0 {
        if eg == 0.0 {
            return Err(EstimationError::DegenerateCross);
        }
        Ok(gg / eg)
    } else {
        deming_closed_form(gg, ee, eg, delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorSummary {
    pub mean: f64,
    pub sd: f64,
    /// Monte-Carlo standard error of the mean, `sd / √R`.
    pub mc_se: f64,
}

impl EstimatorSummary {
    pub fn from_draws(draws: &[f64]) -> Self {
        let r = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / r;
        let sd = if draws.len() > 1 {
            libm::sqrt(draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (r - 1.0))
        } else {
            0.0
        };
        EstimatorSummary {
            mean,
            sd,
            mc_se: sd / libm::sqrt(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BiasReport {
    pub config: SyntheticConfig,
    pub replications: usize,
    pub alpha_true: f64,
    /// δ used for Deming; `None` when it is infinite (`σ_η = 0`).
    pub delta_true: Option<f64>,
    /// Mean attenuation factor over replications.
    pub attenuation_factor: f64,
    /// `α · attenuation_factor`, the large-sample OLS limit.
    pub predicted_ols: f64,
    pub ols: EstimatorSummary,
    pub iv: EstimatorSummary,
    pub deming: EstimatorSummary,
}

/// Summarises per-replication estimates given in replication order.
pub fn summarize(cfg: &SyntheticConfig, estimates: &[ReplicationEstimates]) -> BiasReport {
    let pick = |f: fn(&ReplicationEstimates) -> f64| estimates.iter().map(f).collect::<Vec<_>>();
    let factor = pick(|e| e.attenuation_factor).iter().sum::<f64>() / estimates.len() as f64;
    let delta = cfg.true_delta();
    BiasReport {
        config: *cfg,
        replications: estimates.len(),
        alpha_true: cfg.alpha_true,
        delta_true: delta.is_finite().then_some(delta),
        attenuation_factor: factor,
        predicted_ols: cfg.alpha_true * factor,
        ols: EstimatorSummary::from_draws(&pick(|e| e.ols)),
        iv: EstimatorSummary::from_draws(&pick(|e| e.iv)),
        deming: EstimatorSummary::from_draws(&pick(|e| e.deming)),
    }
}

/// Serial Monte-Carlo study over `replications` independent datasets.
pub fn monte_carlo(
    cfg: &SyntheticConfig,
    replications: usize,
) -> Result<BiasReport, SimulationError> {
    if replications == 0 {
        return Err(SimulationError::InvalidConfig(
            "at least one replication is required",
        ));
    }
    let estimates = (0..replications as u64)
        .map(|r| estimate_replication(cfg, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(cfg, &estimates))
}
