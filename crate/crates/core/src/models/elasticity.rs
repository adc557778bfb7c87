use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::Serialize;

use super::diagnostics::{compute_diagnostics, DiagnosticsBlock, Normalization};
use super::{ModelError, ModelOptions, YearTable, MIN_SPAN, RELIABLE_SPAN, SIGNIFICANCE_Z};
use crate::kalman::{
    filter, fit_mle, smooth, FilterRun, FreeVariance, MleResult, NamedVariance, StateSpaceSpec, VarianceTarget,
};
use crate::series::{lag, log_transform, AnnualSeries, Unit};
use crate::Series;

/// Which coefficients of the elasticity model may drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientDynamics {
    /// Both drift; the intercept is frozen when its final smoothed value is
    /// indistinguishable from zero.
    Auto,
    ConstantMu,
    /// Neither drifts (static regression estimated by the filter).
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElasticityFit {
    pub mu_path: Series,
    pub omega_path: Series,
    pub omega_var_path: Series,
    pub omega_filtered: Series,
    pub mean_omega: f64,
    /// Mean smoothed standard deviation of omega over the reported years.
    pub omega_sd_mean: f64,
    pub mu_hat: f64,
    pub variances: Vec<NamedVariance<f64>>,
    pub diagnostics: DiagnosticsBlock,
    pub conditional_variance: Series,
    pub mu_restricted: bool,
    pub significant: bool,
    pub low_reliability: bool,
    /// Observations entering the regression (before burn-in trimming).
    pub span: usize,
    pub loglik: f64,
    pub converged: bool,
}

const NAMES: [&str; 3] = ["sigma2_eps", "sigma2_mu", "sigma2_omega"];

pub fn fit_elasticity_model(asylum_pc: &Series, gdp_pc: &Series) -> Result<ElasticityFit, ModelError> {
    fit_elasticity_model_with(asylum_pc, gdp_pc, CoefficientDynamics::Auto, &ModelOptions::default())
}

struct Estimated {
    mle: MleResult<f64>,
    run: FilterRun<f64>,
}

fn estimate(
    template: &StateSpaceSpec<f64>,
    y: &Series,
    dynamics: CoefficientDynamics,
    opts: &ModelOptions,
) -> Result<Estimated, ModelError> {
    let mut template = template.clone();
    let mut free = vec![FreeVariance::new(NAMES[0], VarianceTarget::Measurement)];
    match dynamics {
        CoefficientDynamics::Auto => {
            free.push(FreeVariance::new(NAMES[1], VarianceTarget::State(0)));
            free.push(FreeVariance::new(NAMES[2], VarianceTarget::State(1)));
        }
        CoefficientDynamics::ConstantMu => {
            template.state_noise[0] = 0.0;
            free.push(FreeVariance::new(NAMES[2], VarianceTarget::State(1)));
        }
        CoefficientDynamics::Constant => {
            template.state_noise = vec![0.0, 0.0];
        }
    }
    let mle = fit_mle(&template, &free, y, &opts.mle)?;
    let run = smooth(&filter(&mle.fitted_spec, y)?, &mle.fitted_spec)?;
    Ok(Estimated { mle, run })
}

/// Random-walk intercept and elasticity:
/// `log Y_t = mu_t + omega_t log X_{t-1} + eps_t`.
pub fn fit_elasticity_model_with(
    asylum_pc: &Series,
    gdp_pc: &Series,
    dynamics: CoefficientDynamics,
    opts: &ModelOptions,
) -> Result<ElasticityFit, ModelError> {
    let y_all = log_transform(asylum_pc)?;
    let x_lag = lag(&log_transform(gdp_pc)?, 1)?;
    let needed = MIN_SPAN.max(opts.burn_in + opts.mle.min_usable_obs);
    let Some((first, last)) = y_all.overlap(&x_lag) else {
        return Err(ModelError::SpanTooShort { needed, got: 0 });
    };
    let n = (last - first + 1) as usize;
    if n < needed {
        return Err(ModelError::SpanTooShort { needed, got: n });
    }
    let y = y_all.window(first, last)?;
    let xs: Vec<f64> = (first..=last).map(|t| x_lag.get(t).unwrap()).collect();
    if xs.iter().all(|&v| v == xs[0]) {
        return Err(ModelError::DegenerateRegressor);
    }
    let design = xs.iter().map(|&x| vec![1.0, x]).collect();
    let template = StateSpaceSpec::random_walk_coefficients(design, 1.0, vec![1.0, 1.0]).with_burn_in(opts.burn_in);

    let mut used = dynamics;
    let mut est = estimate(&template, &y, dynamics, opts)?;
    if dynamics == CoefficientDynamics::Auto {
        let mu_t = est.run.filtered_mean[n - 1][0];
        let sd_t = est.run.filtered_cov[n - 1][(0, 0)].max(0.0).sqrt();
        if mu_t.abs() < SIGNIFICANCE_Z * sd_t {
            used = CoefficientDynamics::ConstantMu;
            est = estimate(&template, &y, used, opts)?;
        }
    }

    let run = &est.run;
    let from = first + opts.burn_in as i32;
    let country = asylum_pc.country();
    let keep = |v: Vec<f64>, unit| -> Result<Series, ModelError> {
        Ok(AnnualSeries::new(country, first, v, unit)?.window(from, last)?)
    };
    let mu_path = keep(run.state_path(0), Unit::LogValue)?;
    let omega_path = keep(run.state_path(1), Unit::Ratio)?;
    let omega_var_path = keep(run.state_variance_path(1).into_iter().map(|v| v.max(0.0)).collect(), Unit::Ratio)?;
    let omega_filtered = keep(run.filtered_mean.iter().map(|a| a[1]).collect(), Unit::Ratio)?;
    let innovations = keep(run.innovation.clone(), Unit::LogValue)?;
    let conditional_variance = keep(run.innovation_var.clone(), Unit::Ratio)?;

    let k = omega_path.len() as f64;
    let mean_omega = omega_path.values().iter().sum::<f64>() / k;
    let omega_sd_mean = omega_var_path.values().iter().map(|v| v.sqrt()).sum::<f64>() / k;
    let significant = if omega_sd_mean > 0.0 {
        mean_omega.abs() / omega_sd_mean >= SIGNIFICANCE_Z
    } else {
        mean_omega != 0.0
    };

    let scale = match opts.normalization {
        Normalization::LogScale => y.clone(),
        Normalization::PerCapita => asylum_pc.clone(),
    };
    let diagnostics = compute_diagnostics(&innovations, &scale, opts.diagnostics_alpha)?;

    let variances = NAMES
        .iter()
        .map(|&name| {
            est.mle
                .variance_estimates
                .iter()
                .find(|v| v.name == name)
                .cloned()
                .unwrap_or(NamedVariance {
                    name: name.to_string(),
                    value: 0.0,
                    log_value: -opts.mle.log_bound,
                })
        })
        .collect();

    Ok(ElasticityFit {
        mu_hat: run.filtered_mean[n - 1][0],
        mu_path,
        omega_path,
        omega_var_path,
        omega_filtered,
        mean_omega,
        omega_sd_mean,
        variances,
        diagnostics,
        conditional_variance,
        mu_restricted: used != CoefficientDynamics::Auto,
        significant,
        low_reliability: n < RELIABLE_SPAN || !significant,
        span: n,
        loglik: est.mle.loglik_at_optimum,
        converged: est.mle.converged,
    })
}

/// Smoothed elasticities by year, absolute and relative to `baseline`.
pub fn elasticity_year_table(
    fits: &BTreeMap<String, ElasticityFit>,
    baseline: &str,
    years: RangeInclusive<i32>,
) -> Result<(YearTable, YearTable), ModelError> {
    if !fits.contains_key(baseline) {
        return Err(ModelError::MissingBaseline(baseline.to_string()));
    }
    let abs = YearTable::from_series(fits.iter().map(|(c, f)| (c.as_str(), &f.omega_path)), years);
    let rel = abs.relative_to(baseline)?;
    Ok((abs, rel))
}
