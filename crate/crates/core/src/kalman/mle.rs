use serde::Serialize;

use super::{filter, KalmanError, StateSpaceSpec};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::scalar::Scalar;
use crate::series::AnnualSeries;

/// Which variance of a [`StateSpaceSpec`] a free parameter controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarianceTarget {
    Measurement,
    State(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeVariance {
    pub name: String,
    pub target: VarianceTarget,
}

impl FreeVariance {
    pub fn new(name: impl Into<String>, target: VarianceTarget) -> Self {
        Self {
            name: name.into(),
            target,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleOptions<T> {
    pub simplex: SimplexOptions<T>,
    /// Start multipliers applied to the observation variance.
    pub start_multipliers: Vec<T>,
    /// Fitted log-variances below this are reported as exactly zero.
    pub zero_log_threshold: T,
    /// Log-variances are clamped to `[-bound, bound]` during the search.
    pub log_bound: T,
    pub min_usable_obs: usize,
}

impl<T: Scalar> Default for MleOptions<T> {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            start_multipliers: vec![T::lit(0.1), T::one(), T::lit(10.0)],
            zero_log_threshold: T::lit(-25.0),
            log_bound: T::lit(40.0),
            min_usable_obs: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedVariance<T> {
    pub name: String,
    /// Reported estimate (zero when the log-variance fell below the threshold).
    pub value: T,
    pub log_value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleResult<T> {
    pub variance_estimates: Vec<NamedVariance<T>>,
    pub loglik_at_optimum: T,
    pub converged: bool,
    pub n_evaluations: usize,
    pub restarts_used: usize,
    /// The template with the fitted (unrounded) variances plugged in.
    pub fitted_spec: StateSpaceSpec<T>,
}

impl<T: Scalar> MleResult<T> {
    pub fn get(&self, name: &str) -> Option<T> {
        self.variance_estimates
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.value)
    }
}

fn apply<T: Scalar>(spec: &mut StateSpaceSpec<T>, free: &[FreeVariance], theta: &[T], bound: T) {
    for (fv, &th) in free.iter().zip(theta) {
        let v = th.max(-bound).min(bound).exp();
        match fv.target {
            VarianceTarget::Measurement => spec.meas_var = v,
            VarianceTarget::State(i) => spec.state_noise[i] = v,
        }
    }
}

/// Maximizes the prediction-error log-likelihood over log-variances with a
/// multi-start simplex search. The reported optimum is the best point
/// evaluated across all starts.
pub fn fit_mle<T: Scalar>(
    template: &StateSpaceSpec<T>,
    free: &[FreeVariance],
    obs: &AnnualSeries<T>,
    opts: &MleOptions<T>,
) -> Result<MleResult<T>, KalmanError> {
    template.validate()?;
    if free.is_empty() || free.len() > 3 {
        return Err(KalmanError::InvalidSpec(
            "between one and three free variances required".into(),
        ));
    }
    for fv in free {
        if let VarianceTarget::State(i) = fv.target {
            if i >= template.state_dim() {
                return Err(KalmanError::InvalidSpec(format!("no state component {i}")));
            }
        }
    }
    let usable = obs.len().saturating_sub(template.burn_in);
    if usable < opts.min_usable_obs {
        return Err(KalmanError::TooFewObservations {
            needed: opts.min_usable_obs + template.burn_in,
            got: obs.len(),
        });
    }

    let var = obs.sample_variance();
    let base = if var > T::zero() { var } else { T::one() };
    let k = T::of_usize(free.len());

    let mut best: Option<(T, Vec<T>)> = None;
    let mut evaluations = 0usize;
    let mut converged = false;
    let mut best_run_converged = false;
    let mut restarts = 0usize;
    let mut work = template.clone();

    for &mult in &opts.start_multipliers {
        restarts += 1;
        let before = best.as_ref().map(|b| b.0);
        let x0 = vec![(mult * base / k).ln(); free.len()];
        let mut track = |theta: &[T]| -> T {
            apply(&mut work, free, theta, opts.log_bound);
            match filter(&work, obs) {
                Ok(run) if run.loglik.is_finite() => {
                    let ll = run.loglik;
                    if best.as_ref().is_none_or(|(b, _)| ll > *b) {
                        best = Some((ll, theta.to_vec()));
                    }
                    -ll
                }
                _ => T::infinity(),
            }
        };
        let res = nelder_mead(&mut track, &x0, &opts.simplex);
        evaluations += res.evaluations;
        converged |= res.converged;
        let after = best.as_ref().map(|b| b.0);
        if after != before {
            best_run_converged = res.converged;
        }
    }

    let Some((ll, theta)) = best else {
        return Err(KalmanError::InvalidSpec(
            "likelihood undefined at every evaluated point".into(),
        ));
    };
    let mut fitted = template.clone();
    apply(&mut fitted, free, &theta, opts.log_bound);
    let variance_estimates = free
        .iter()
        .zip(&theta)
        .map(|(fv, &th)| {
            let th = th.max(-opts.log_bound).min(opts.log_bound);
            NamedVariance {
                name: fv.name.clone(),
                value: if th < opts.zero_log_threshold {
                    T::zero()
                } else {
                    th.exp()
                },
                log_value: th,
            }
        })
        .collect();
    Ok(MleResult {
        variance_estimates,
        loglik_at_optimum: ll,
        converged: converged && best_run_converged,
        n_evaluations: evaluations,
        restarts_used: restarts,
        fitted_spec: fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kalman::{filter, StateSpaceSpec};
    use crate::series::Unit;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn local_level_data(seed: u64, n: usize, meas: f64, state: f64) -> AnnualSeries<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut level = 0.0;
        let v = (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                let h: f64 = StandardNormal.sample(&mut rng);
                level += state.sqrt() * h;
                level + meas.sqrt() * e
            })
            .collect();
        AnnualSeries::new("SIM", 1800, v, Unit::Ratio).unwrap()
    }

    fn ll_free() -> Vec<FreeVariance> {
        vec![
            FreeVariance::new("meas", VarianceTarget::Measurement),
            FreeVariance::new("state", VarianceTarget::State(0)),
        ]
    }

    #[test]
    fn recovers_local_level_variances_median_of_20() {
        let mut meas = Vec::new();
        let mut state = Vec::new();
        for seed in 0..20 {
            let y = local_level_data(1000 + seed, 200, 1.0, 0.1);
            let tpl = StateSpaceSpec::random_walk_coefficients(vec![vec![1.0]; 200], 1.0, vec![1.0]);
            let r = fit_mle(&tpl, &ll_free(), &y, &MleOptions::default()).unwrap();
            meas.push(r.get("meas").unwrap());
            state.push(r.get("state").unwrap());
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (v[9] + v[10]) / 2.0
        };
        let (m, s) = (median(&mut meas), median(&mut state));
        assert!((m - 1.0).abs() <= 0.3, "meas median {m}");
        assert!((s - 0.1).abs() <= 0.03, "state median {s}");
    }

    #[test]
    fn optimum_beats_true_parameters() {
        let y = local_level_data(5, 200, 1.0, 0.1);
        let tpl = StateSpaceSpec::random_walk_coefficients(vec![vec![1.0]; 200], 1.0, vec![0.1]);
        let truth = filter(&tpl, &y).unwrap().loglik;
        let r = fit_mle(&tpl, &ll_free(), &y, &MleOptions::default()).unwrap();
        assert!(r.loglik_at_optimum >= truth);
        assert!(r.converged);
        assert_eq!(r.restarts_used, 3);
        let refit = filter(&r.fitted_spec, &y).unwrap().loglik;
        assert_eq!(refit, r.loglik_at_optimum);
    }

    #[test]
    fn constant_observations_push_variances_to_zero() {
        let y = AnnualSeries::new("C", 2000, vec![2.5; 12], Unit::Ratio).unwrap();
        let tpl = StateSpaceSpec::random_walk_coefficients(vec![vec![1.0]; 12], 1.0, vec![1.0]);
        let r = fit_mle(&tpl, &ll_free(), &y, &MleOptions::default()).unwrap();
        assert_eq!(r.get("meas"), Some(0.0));
        assert_eq!(r.get("state"), Some(0.0));
    }

    #[test]
    fn too_few_observations() {
        let y = AnnualSeries::new("C", 2000, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], Unit::Ratio).unwrap();
        let tpl = StateSpaceSpec::random_walk_coefficients(vec![vec![1.0]; 7], 1.0, vec![1.0]);
        assert!(matches!(
            fit_mle(&tpl, &ll_free(), &y, &MleOptions::default()),
            Err(KalmanError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn estimates_are_nonnegative_and_deterministic() {
        let y = local_level_data(77, 40, 0.5, 0.05);
        let tpl = StateSpaceSpec::random_walk_coefficients(vec![vec![1.0]; 40], 1.0, vec![1.0]);
        let a = fit_mle(&tpl, &ll_free(), &y, &MleOptions::default()).unwrap();
        let b = fit_mle(&tpl, &ll_free(), &y, &MleOptions::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.variance_estimates.iter().all(|v| v.value >= 0.0));
    }
}
