//! Gaussian confidence intervals and the OLS-vs-IV Hausman comparison.

use crate::estimators::EstimateResult;
use crate::numerics::{self, NumericsError};

/// Floor on `Var_IV − Var_OLS` in [`hausman_test`].
pub const HAUSMAN_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InferenceError {
    #[error("standard error {0} is negative or not finite")]
    InvalidStandardError(f64),
    #[error("confidence level {0} must lie in (0, 1)")]
    InvalidLevel(f64),
    #[error("estimates come from different samples ({a_from:?}-{a_to:?}, n={a_n} vs {b_from:?}-{b_to:?}, n={b_n})")]
    SampleMismatch {
        a_from: Option<i32>,
        a_to: Option<i32>,
        a_n: usize,
        b_from: Option<i32>,
        b_to: Option<i32>,
        b_n: usize,
    },
    #[error("estimate has no standard error")]
    MissingStandardError,
}

/// A confidence interval with its nominal level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Two-sided critical value `Φ⁻¹(1 − (1 − level)/2)`.
pub fn critical_value(level: f64) -> Result<f64, InferenceError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(InferenceError::InvalidLevel(level));
    }
    numerics::std_normal_quantile(1.0 - (1.0 - level) / 2.0).map_err(|e| match e {
        NumericsError::DomainError(p) => InferenceError::InvalidLevel(p),
        _ => InferenceError::InvalidLevel(level),
    })
}

/// `estimate ± z·se` with `z` the Gaussian critical value at `level`.
pub fn gaussian_ci(estimate: f64, se: f64, level: f64) -> Result<Interval, InferenceError> {
    if !(se >= 0.0 && se.is_finite()) {
        return Err(InferenceError::InvalidStandardError(se));
    }
    let z = critical_value(level)?;
    Ok(Interval {
        lo: estimate - z * se,
        hi: estimate + z * se,
        level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ComparisonMethod {
    /// Scalar Hausman contrast referred to χ²₁.
    Hausman,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonTest {
    pub estimate_a: f64,
    pub estimate_b: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub method: ComparisonMethod,
}

/// Hausman contrast of an efficient-under-the-null estimate (OLS) against a
/// consistent one (IV):
///
/// `H = (α_IV − α_OLS)² / max(se_IV² − se_OLS², ε)`, `p = P(χ²₁ > H)`.
pub fn hausman_test(
    ols: &EstimateResult,
    iv: &EstimateResult,
) -> Result<ComparisonTest, InferenceError> {
    if ols.sample != iv.sample {
        return Err(InferenceError::SampleMismatch {
            a_from: ols.sample.from,
            a_to: ols.sample.to,
            a_n: ols.sample.n,
            b_from: iv.sample.from,
            b_to: iv.sample.to,
            b_n: iv.sample.n,
        });
    }
    let se_ols = ols.se_alpha.ok_or(InferenceError::MissingStandardError)?;
    let se_iv = iv.se_alpha.ok_or(InferenceError::MissingStandardError)?;
    Ok(hausman_from_moments(
        ols.alpha_hat,
        se_ols,
        iv.alpha_hat,
        se_iv,
    ))
}

pub fn hausman_from_moments(
    alpha_ols: f64,
    se_ols: f64,
    alpha_iv: f64,
    se_iv: f64,
) -> ComparisonTest {
    let diff = alpha_iv - alpha_ols;
    let var_diff = (se_iv * se_iv - se_ols * se_ols).max(HAUSMAN_VARIANCE_FLOOR);
    let statistic = diff * diff / var_diff;
    ComparisonTest {
        estimate_a: alpha_ols,
        estimate_b: alpha_iv,
        statistic,
        p_value: numerics::chi2_sf_1df(statistic),
        method: ComparisonMethod::Hausman,
    }
}
