//! Model-based residual bootstrap for Deming regression.
//!
//! 1. Fit Deming, form residuals `û = g − α̂e − Wγ̂` and recentre them.
//! 2. For replicate `b`, draw `T` recentred residuals with replacement and
//!    build `G* = α̂e + Wγ̂ + ũ*`; `e` and `W` stay fixed.
//! 3. Re-estimate α on `(G*, e, W)`.
//! 4. Summarise the replicates by their standard deviation (divisor `B − 1`)
//!    and percentile intervals.
//!
//! Replicate `b` draws from the generator addressed by `(seed, b)`, so the
//! replicate vector does not depend on evaluation order. [`ResidualBootstrap`]
//! exposes single replicates so callers can evaluate them in parallel.

use alloc::vec::Vec;

use rand::Rng;

use crate::dataset::Dataset;
use crate::estimators::deming::deming_with_projector;
use crate::estimators::{
    deming_univariate, DemingConfig, EstimateResult, EstimationError, ModelSpec,
};
use crate::inference::Interval;
use crate::numerics::{Matrix, Projector};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BootstrapError {
    #[error("at least 2 replicates are required, got {0}")]
    TooFewReplicates(usize),
    #[error("confidence level {0} must lie in (0, 1)")]
    DomainError(f64),
    #[error("bootstrap replicate {index} failed: {source}")]
    ReplicateFailure {
        index: usize,
        #[source]
        source: EstimationError,
    },
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapConfig {
    replications: usize,
    seed: u64,
    level: LevelBits,
}

// f64 wrapper so the config stays `Eq`; only valid levels are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
struct LevelBits(u64);

impl BootstrapConfig {
    pub fn new(replications: usize, seed: u64, level: f64) -> Result<Self, BootstrapError> {
        if replications < 2 {
            return Err(BootstrapError::TooFewReplicates(replications));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(BootstrapError::DomainError(level));
        }
        Ok(BootstrapConfig {
            replications,
            seed,
            level: LevelBits(level.to_bits()),
        })
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn level(&self) -> f64 {
        f64::from_bits(self.level.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapResult {
    /// The original fit, with the bootstrap standard error and percentile
    /// interval attached.
    pub estimate: EstimateResult,
    /// Replicate estimates in replicate-index order.
    pub replicates: Vec<f64>,
    pub se: f64,
    /// `[q(a/2), q(1 − a/2)]` of the replicate distribution.
    pub percentile_ci: Interval,
    /// `[α̂ − q(1 − a/2)·se, α̂ + q(a/2)·se]`, with `q` the replicate
    /// percentiles, taken literally.
    pub scaled_ci: Interval,
    pub config: BootstrapConfig,
}

/// A fitted Deming model ready to generate bootstrap replicates.
#[derive(Debug, Clone)]
pub struct ResidualBootstrap {
    regressor: Vec<f64>,
    covariates: Option<Projector>,
    delta: DemingConfig,
    estimate: EstimateResult,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    config: BootstrapConfig,
}

impl ResidualBootstrap {
    pub fn new(
        g: &[f64],
        e: &[f64],
        w: Option<&Matrix>,
        delta: DemingConfig,
        config: BootstrapConfig,
    ) -> Result<Self, BootstrapError> {
        let covariates = w
            .map(Projector::new)
            .transpose()
            .map_err(EstimationError::from)?;
        let estimate = match &covariates {
            Some(p) => deming_with_projector(g, e, p, delta)?,
            None => deming_univariate(g, e, delta)?,
        };
        let mut fitted: Vec<f64> = e.iter().map(|ei| estimate.alpha_hat * ei).collect();
        if let Some(w) = w {
            let wg = w
                .mul_vec(&estimate.gamma_hat)
                .map_err(EstimationError::from)?;
            for (f, x) in fitted.iter_mut().zip(wg.iter()) {
                *f += x;
            }
        }
        let mut residuals: Vec<f64> = g.iter().zip(&fitted).map(|(gi, fi)| gi - fi).collect();
        let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        for r in &mut residuals {
            *r -= mean;
        }
        Ok(ResidualBootstrap {
            regressor: e.to_vec(),
            covariates,
            delta,
            estimate,
            fitted,
            residuals,
            config,
        })
    }

    /// Bootstrap for a model specification on a dataset.
    pub fn for_spec(
        spec: &ModelSpec,
        data: &Dataset,
        delta: DemingConfig,
        config: BootstrapConfig,
    ) -> Result<Self, BootstrapError> {
        let d = spec.design(data)?;
        let mut boot = Self::new(
            &d.response,
            &d.regressor,
            d.covariates.as_ref(),
            delta,
            config,
        )?;
        boot.estimate.sample = d.sample;
        boot.estimate.covariates = spec.covariates.clone();
        Ok(boot)
    }

    pub fn estimate(&self) -> &EstimateResult {
        &self.estimate
    }

    /// Recentred residuals `ũ`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.config
    }

    /// Pseudo-response for replicate `index`.
    pub fn pseudo_response(&self, index: usize) -> Vec<f64> {
        let mut rng = stream_rng(self.config.seed, Stream::BootstrapResample, index as u64);
        let n = self.residuals.len();
        self.fitted
            .iter()
            .map(|f| f + self.residuals[rng.random_range(0..n)])
            .collect()
    }

    /// α̂* for replicate `index`.
    pub fn replicate(&self, index: usize) -> Result<f64, BootstrapError> {
        let g_star = self.pseudo_response(index);
        let fit = match &self.covariates {
            Some(p) => deming_with_projector(&g_star, &self.regressor, p, self.delta),
            None => deming_univariate(&g_star, &self.regressor, self.delta),
        };
        fit.map(|r| r.alpha_hat)
            .map_err(|source| BootstrapError::ReplicateFailure { index, source })
    }

    /// Runs every replicate on the current thread.
    pub fn run(&self) -> Result<BootstrapResult, BootstrapError> {
        let replicates = (0..self.config.replications)
            .map(|b| self.replicate(b))
            .collect::<Result<Vec<_>, _>>()?;
        self.summarize(replicates)
    }

    /// Assembles a result from replicates given in index order.
    pub fn summarize(&self, replicates: Vec<f64>) -> Result<BootstrapResult, BootstrapError> {
        let level = self.config.level();
        let se = bootstrap_se(&replicates)?;
        let percentile = percentile_ci(&replicates, level)?;
        let alpha = self.estimate.alpha_hat;
        let scaled_ci = Interval {
            lo: alpha - percentile.hi * se,
            hi: alpha + percentile.lo * se,
            level,
        };
        Ok(BootstrapResult {
            estimate: self.estimate.clone().with_uncertainty(se, percentile),
            replicates,
            se,
            percentile_ci: percentile,
            scaled_ci,
            config: self.config,
        })
    }
}

/// Serial residual bootstrap of the Deming estimator for `spec`.
pub fn residual_bootstrap(
    spec: &ModelSpec,
    data: &Dataset,
    delta: DemingConfig,
    config: BootstrapConfig,
) -> Result<BootstrapResult, BootstrapError> {
    ResidualBootstrap::for_spec(spec, data, delta, config)?.run()
}

/// Sample standard deviation with divisor `B − 1`.
pub fn bootstrap_se(replicates: &[f64]) -> Result<f64, BootstrapError> {
    let b = replicates.len();
    if b < 2 {
        return Err(BootstrapError::TooFewReplicates(b));
    }
    let mean = replicates.iter().sum::<f64>() / b as f64;
    let ss: f64 = replicates.iter().map(|r| (r - mean) * (r - mean)).sum();
    Ok(libm::sqrt(ss / (b - 1) as f64))
}

/// Linear interpolation between order statistics ("type 7").
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Empirical `[a/2, 1 − a/2]` percentiles with `a = 1 − level`.
pub fn percentile_ci(replicates: &[f64], level: f64) -> Result<Interval, BootstrapError> {
    if replicates.len() < 2 {
        return Err(BootstrapError::TooFewReplicates(replicates.len()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(BootstrapError::DomainError(level));
    }
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(Interval {
        lo: quantile_sorted(&sorted, tail),
        hi: quantile_sorted(&sorted, 1.0 - tail),
        level,
    })
}
