//! Time-series econometrics for short annual panels.
//!
//! * [`series`] and [`synth`]: annual series, transforms, seeded generators.
//! * [`kalman`]: filter, smoother, conditional variances, variance MLE.
//! * [`models`]: ratio, log-log and time-varying elasticity models.
//! * [`econ`]: unit-root, bounds, causality and residual tests.
//! * [`pipeline`]: CSV ingestion, per-country orchestration, table emission.
//!
//! The numeric core (series, linear algebra, Kalman, simplex search) is
//! generic over [`Scalar`]; the `f64` aliases below are what the statistical
//! tests and the pipeline use.

// Negated comparisons are how NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod econ;
pub mod kalman;
pub mod linalg;
pub mod models;
pub mod optim;
pub mod pipeline;
pub mod scalar;
pub mod selftest;
pub mod series;
pub mod synth;

pub use scalar::Scalar;

pub type Series = series::AnnualSeries<f64>;
pub type Series32 = series::AnnualSeries<f32>;
pub type StateSpace = kalman::StateSpaceSpec<f64>;
pub type StateSpace32 = kalman::StateSpaceSpec<f32>;
pub type Run = kalman::FilterRun<f64>;
pub type Mle = kalman::MleResult<f64>;
