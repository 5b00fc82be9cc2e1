//! Errors-in-variables estimation of the CO₂ airborne fraction.
//!
//! The airborne fraction α is the slope of annual atmospheric CO₂ growth on
//! anthropogenic emissions. Emissions are observed with error, which biases
//! ordinary least squares toward zero. This crate provides the estimators
//! that correct for it, along with the machinery needed to run them on the
//! annual carbon-cycle series:
//!
//! - [`numerics`]: dense Gram/LDLᵀ solves, projections and distribution functions
//! - [`dataset`]: year-indexed series, emissions variants, detrending and trend tests
//! - [`estimators`]: OLS, univariate and multivariate Deming, IV and GIVE
//! - [`bootstrap`]: model-based residual bootstrap for Deming standard errors
//! - [`inference`]: Gaussian intervals and the OLS-vs-IV Hausman comparison
//! - [`simulate`]: synthetic measurement-error data and Monte-Carlo bias studies
//! - [`rng`]: seed/stream-addressed random generators
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! parallel bootstrap driver and the command line live in the `airborne`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bootstrap;
pub mod dataset;
pub mod estimators;
pub mod inference;
pub mod numerics;
pub mod rng;
pub mod simulate;

pub use bootstrap::{BootstrapConfig, BootstrapError, BootstrapResult};
pub use dataset::{AnnualSeries, Dataset, DatasetError, LulccSource, TrendTestResult};
pub use estimators::{
    DemingConfig, EstimateResult, EstimationError, EstimatorOptions, Method, ModelSpec,
    VarianceDivisor,
};
pub use inference::{ComparisonTest, InferenceError};
pub use numerics::{Matrix, NumericsError, Vector};
pub use simulate::{BiasReport, EStarProcess, SyntheticConfig, SyntheticData};
