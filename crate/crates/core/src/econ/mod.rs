//! Classical small-sample test battery on `f64` annual series.

mod binomial;
mod causality;
mod ols;
mod residual;
mod unit_root;

pub use binomial::{binomial_group_test, BinomialGroup};
pub use causality::{
    ardl_bounds_test, bounds_decision, granger_causality, granger_ecm, CausalDirection, CausalityResult, DirectionStat,
    GrangerForm,
    BOUNDS_HI, BOUNDS_LO, CAUSALITY_THRESHOLD,
};
pub use ols::{f_test_nested, ols, FTest, RegressionFit};
pub use residual::{arch_lm_test, box_pierce, box_pierce_lags};
pub use unit_root::{adf_test, dfgls_test, IntegrationVerdict};

use serde::Serialize;
use thiserror::Error;

use crate::series::SeriesError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("span too short: need {needed} observations, have {got}")]
    SpanTooShort { needed: usize, got: usize },
    #[error("regressors are collinear ({column})")]
    RankDeficient { column: String },
    #[error("nested models do not share the same sample or regressors")]
    SpanMismatch,
    #[error("unsupported significance level {0}; use 0.01, 0.05 or 0.10")]
    UnsupportedAlpha(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
    Undecided,
}

/// What a test statistic was compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    CriticalValue { value: f64 },
    Bounds { lower: f64, upper: f64 },
    ChiSquare { df: usize, critical: f64 },
    FDist { df1: usize, df2: usize },
    ExactPValue { p_value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub name: String,
    pub statistic: f64,
    pub reference: Reference,
    pub decision: Decision,
    pub alpha: f64,
    pub detail: String,
}
