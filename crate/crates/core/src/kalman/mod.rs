//! Linear-Gaussian state-space engine with scalar measurements.
//!
//! Model, for observation index `t = 1..n`:
//!
//! ```text
//! y_t     = z_t' alpha_t + eps_t        eps_t ~ N(0, meas_var)
//! alpha_t = T alpha_{t-1} + eta_t       eta_t ~ N(0, diag(state_noise))
//! alpha_0 ~ N(init_mean, init_cov)
//! ```
//!
//! The filter stores predicted and updated moments so the fixed-interval
//! smoother can run backwards without refiltering. The log-likelihood is the
//! prediction-error decomposition over innovations after the burn-in.

mod mle;

pub use mle::{fit_mle, FreeVariance, MleOptions, MleResult, NamedVariance, VarianceTarget};

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;
use crate::series::{AnnualSeries, Unit};

/// Prior variance scale for the big-kappa diffuse initialization.
pub const DIFFUSE_KAPPA: f64 = 1e6;
/// Innovations excluded from the likelihood by default.
pub const DEFAULT_BURN_IN: usize = 2;
/// Innovation variances at or below this abort the filter.
pub const INNOVATION_VAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KalmanError {
    #[error("invalid state-space specification: {0}")]
    InvalidSpec(String),
    #[error("need at least {needed} observations, have {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("innovation variance {value:e} at or below floor in {year}")]
    DegenerateInnovationVariance { year: i32, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpaceSpec<T> {
    /// Measurement row `z_t` for every observation.
    pub design: Vec<Vec<T>>,
    pub transition: Matrix<T>,
    pub meas_var: T,
    /// Diagonal of the state disturbance covariance.
    pub state_noise: Vec<T>,
    pub init_mean: Vec<T>,
    pub init_cov: Matrix<T>,
    /// Leading innovations left out of the log-likelihood.
    pub burn_in: usize,
}

impl<T: Scalar> StateSpaceSpec<T> {
    /// Random-walk coefficients (`T = I`) with `a_0 = 0`, `P_0 = kappa I`.
    pub fn random_walk_coefficients(design: Vec<Vec<T>>, meas_var: T, state_noise: Vec<T>) -> Self {
        let m = state_noise.len();
        Self {
            design,
            transition: Matrix::identity(m),
            meas_var,
            state_noise,
            init_mean: vec![T::zero(); m],
            init_cov: Matrix::identity(m).scale(T::lit(DIFFUSE_KAPPA)),
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.transition.rows()
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<(), KalmanError> {
        let m = self.state_dim();
        let bad = |msg: &str| Err(KalmanError::InvalidSpec(msg.to_string()));
        if m == 0 || !self.transition.is_square() {
            return bad("transition must be a non-empty square matrix");
        }
        if self.state_noise.len() != m || self.init_mean.len() != m {
            return bad("state noise / initial mean dimension mismatch");
        }
        if self.init_cov.rows() != m || self.init_cov.cols() != m {
            return bad("initial covariance dimension mismatch");
        }
        if self.design.iter().any(|z| z.len() != m) {
            return bad("measurement row dimension mismatch");
        }
        if !(self.meas_var >= T::zero()) {
            return bad("measurement variance must be non-negative");
        }
        if self.state_noise.iter().any(|&q| !(q >= T::zero())) {
            return bad("state noise variances must be non-negative");
        }
        let scale = self.init_cov.diag().iter().fold(T::one(), |a, &v| a.max(v.abs()));
        if self.init_cov.max_asymmetry() > T::epsilon().sqrt() * scale {
            return bad("initial covariance must be symmetric");
        }
        let (eig, _) = self.init_cov.symmetric_eigen();
        if eig.iter().any(|&l| l < -T::epsilon().sqrt() * scale) {
            return bad("initial covariance must be positive semi-definite");
        }
        Ok(())
    }
}

/// Output of [`filter`], optionally augmented by [`smooth`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterRun<T> {
    pub start_year: i32,
    pub burn_in: usize,
    pub predicted_mean: Vec<Vec<T>>,
    pub predicted_cov: Vec<Matrix<T>>,
    pub filtered_mean: Vec<Vec<T>>,
    pub filtered_cov: Vec<Matrix<T>>,
    pub innovation: Vec<T>,
    pub innovation_var: Vec<T>,
    /// Update gain `P_{t|t-1} z_t / F_t`.
    pub gain: Vec<Vec<T>>,
    pub loglik: T,
    pub smoothed_mean: Option<Vec<Vec<T>>>,
    pub smoothed_cov: Option<Vec<Matrix<T>>>,
}

impl<T: Scalar> FilterRun<T> {
    pub fn len(&self) -> usize {
        self.innovation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.innovation.is_empty()
    }

    pub fn year(&self, t: usize) -> i32 {
        self.start_year + t as i32
    }

    /// Smoothed if available, otherwise filtered, path of state component `i`.
    pub fn state_path(&self, i: usize) -> Vec<T> {
        self.smoothed_mean
            .as_ref()
            .unwrap_or(&self.filtered_mean)
            .iter()
            .map(|a| a[i])
            .collect()
    }

    pub fn state_variance_path(&self, i: usize) -> Vec<T> {
        self.smoothed_cov
            .as_ref()
            .unwrap_or(&self.filtered_cov)
            .iter()
            .map(|p| p[(i, i)])
            .collect()
    }
}

/// Runs the Kalman filter over `obs`.
pub fn filter<T: Scalar>(
    spec: &StateSpaceSpec<T>,
    obs: &AnnualSeries<T>,
) -> Result<FilterRun<T>, KalmanError> {
    spec.validate()?;
    let m = spec.state_dim();
    let n = obs.len();
    if n < m + 1 {
        return Err(KalmanError::TooFewObservations { needed: m + 1, got: n });
    }
    if spec.design.len() != n {
        return Err(KalmanError::InvalidSpec(format!(
            "{} measurement rows for {} observations",
            spec.design.len(),
            n
        )));
    }

    let tt = &spec.transition;
    let tt_t = tt.transpose();
    let q = Matrix::from_diag(&spec.state_noise);
    let floor = T::lit(INNOVATION_VAR_FLOOR);
    let ln2pi = T::lit((2.0 * std::f64::consts::PI).ln());
    let half = T::lit(0.5);
    let ident = Matrix::identity(m);

    let mut a = spec.init_mean.clone();
    let mut p = spec.init_cov.clone();
    let mut run = FilterRun {
        start_year: obs.start_year(),
        burn_in: spec.burn_in,
        predicted_mean: Vec::with_capacity(n),
        predicted_cov: Vec::with_capacity(n),
        filtered_mean: Vec::with_capacity(n),
        filtered_cov: Vec::with_capacity(n),
        innovation: Vec::with_capacity(n),
        innovation_var: Vec::with_capacity(n),
        gain: Vec::with_capacity(n),
        loglik: T::zero(),
        smoothed_mean: None,
        smoothed_cov: None,
    };

    for (t, &y) in obs.values().iter().enumerate() {
        let z = &spec.design[t];
        let a_pred = tt.mul_vec(&a);
        let p_pred = tt.matmul(&p).matmul(&tt_t).add(&q).symmetrize();

        let pz = p_pred.mul_vec(z);
        let f = dot(z, &pz) + spec.meas_var;
        if !(f > floor) {
            return Err(KalmanError::DegenerateInnovationVariance {
                year: obs.start_year() + t as i32,
                value: f.as_f64(),
            });
        }
        let v = y - dot(z, &a_pred);
        let k: Vec<T> = pz.iter().map(|&c| c / f).collect();

        a = a_pred.iter().zip(&k).map(|(&ai, &ki)| ai + ki * v).collect();
        // Joseph form keeps P symmetric positive semi-definite
        let mut ikz = ident.clone();
        for i in 0..m {
            for j in 0..m {
                ikz[(i, j)] = ikz[(i, j)] - k[i] * z[j];
            }
        }
        let mut kk = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                kk[(i, j)] = k[i] * k[j] * spec.meas_var;
            }
        }
        p = ikz.matmul(&p_pred).matmul(&ikz.transpose()).add(&kk).symmetrize();

        if t >= spec.burn_in {
            run.loglik = run.loglik - half * (ln2pi + f.ln() + v * v / f);
        }
        run.predicted_mean.push(a_pred);
        run.predicted_cov.push(p_pred);
        run.filtered_mean.push(a.clone());
        run.filtered_cov.push(p.clone());
        run.innovation.push(v);
        run.innovation_var.push(f);
        run.gain.push(k);
    }
    Ok(run)
}

/// Fixed-interval (Rauch-Tung-Striebel) smoother. The final time point
/// copies the filtered moments.
pub fn smooth<T: Scalar>(
    run: &FilterRun<T>,
    spec: &StateSpaceSpec<T>,
) -> Result<FilterRun<T>, KalmanError> {
    let n = run.len();
    if n == 0 || run.predicted_cov.len() != n {
        return Err(KalmanError::InvalidSpec(
            "filter run lacks predicted moments".into(),
        ));
    }
    let tt_t = spec.transition.transpose();
    let rel_tol = T::epsilon() * T::lit(64.0);

    let mut sm_mean = vec![Vec::new(); n];
    let mut sm_cov = vec![Matrix::zeros(0, 0); n];
    sm_mean[n - 1] = run.filtered_mean[n - 1].clone();
    sm_cov[n - 1] = run.filtered_cov[n - 1].clone();

    for t in (0..n - 1).rev() {
        let p_filt = &run.filtered_cov[t];
        let p_next_pred = &run.predicted_cov[t + 1];
        let gain = p_filt.matmul(&tt_t).matmul(&p_next_pred.pinv_symmetric(rel_tol));
        let dm: Vec<T> = sm_mean[t + 1]
            .iter()
            .zip(&run.predicted_mean[t + 1])
            .map(|(&s, &p)| s - p)
            .collect();
        let corr = gain.mul_vec(&dm);
        sm_mean[t] = run.filtered_mean[t]
            .iter()
            .zip(&corr)
            .map(|(&a, &c)| a + c)
            .collect();
        let dp = sm_cov[t + 1].sub(p_next_pred);
        sm_cov[t] = p_filt
            .add(&gain.matmul(&dp).matmul(&gain.transpose()))
            .symmetrize();
    }

    let mut out = run.clone();
    out.smoothed_mean = Some(sm_mean);
    out.smoothed_cov = Some(sm_cov);
    Ok(out)
}

/// One-step-ahead conditional variances `F_t`, year-aligned with the observations.
pub fn conditional_variances<T: Scalar>(run: &FilterRun<T>) -> AnnualSeries<T> {
    AnnualSeries::new("", run.start_year, run.innovation_var.clone(), Unit::Ratio)
        .expect("filter run has finite innovation variances")
}
