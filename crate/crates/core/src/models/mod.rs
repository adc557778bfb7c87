//! Ratio, constant-elasticity and time-varying elasticity models.

mod diagnostics;
mod elasticity;
mod loglog;
mod ratio;
mod table;

pub use diagnostics::{compute_diagnostics, DiagnosticsBlock, Normalization};
pub use elasticity::{
    elasticity_year_table, fit_elasticity_model, fit_elasticity_model_with, CoefficientDynamics, ElasticityFit,
};
pub use loglog::{fit_loglog, fit_loglog_lagged, LogLogFit};
pub use ratio::{fit_ratio_model, RatioFit};
pub use table::YearTable;

use thiserror::Error;

use crate::econ::EconError;
use crate::kalman::{KalmanError, MleOptions, DEFAULT_BURN_IN};
use crate::series::SeriesError;

pub const MIN_SPAN: usize = 8;
/// Spans shorter than this are flagged as unreliable.
pub const RELIABLE_SPAN: usize = 14;
pub const SIGNIFICANCE_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("span too short: need {needed} years, have {got}")]
    SpanTooShort { needed: usize, got: usize },
    #[error("regressor has no variation")]
    DegenerateRegressor,
    #[error("baseline country {0} has no fit")]
    MissingBaseline(String),
    #[error(transparent)]
    Kalman(#[from] KalmanError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    pub burn_in: usize,
    /// Lag of GDP in the ratio model's measurement row (0 or 1).
    pub ratio_lag: usize,
    pub normalization: Normalization,
    /// Level for the residual Box-Pierce and ARCH tests.
    pub diagnostics_alpha: f64,
    pub mle: MleOptions<f64>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            ratio_lag: 1,
            normalization: Normalization::LogScale,
            diagnostics_alpha: 0.05,
            mle: MleOptions::default(),
        }
    }
}
