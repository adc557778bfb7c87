use serde::Serialize;

use super::{ModelError, ModelOptions, MIN_SPAN};
use crate::kalman::{filter, fit_mle, smooth, FreeVariance, NamedVariance, StateSpaceSpec, VarianceTarget};
use crate::series::{AnnualSeries, Unit};
use crate::Series;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioFit {
    /// `Y_t / X_t`, on the reported (post burn-in) years.
    pub crude: Series,
    pub smoothed: Series,
    pub smoothed_var: Series,
    pub filtered: Series,
    pub variances: Vec<NamedVariance<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub gdp_lag: usize,
}

/// Random-walk ratio through the origin: `Y_t = rho_t X_{t-lag} + eps_t`.
pub fn fit_ratio_model(asylum_pc: &Series, gdp_pc: &Series, opts: &ModelOptions) -> Result<RatioFit, ModelError> {
    let lag = opts.ratio_lag as i32;
    let first = asylum_pc.start_year().max(gdp_pc.start_year() + lag);
    let last = asylum_pc.end_year().min(gdp_pc.end_year());
    let n = (last - first + 1).max(0) as usize;
    if n < MIN_SPAN.max(opts.burn_in + opts.mle.min_usable_obs) {
        return Err(ModelError::SpanTooShort {
            needed: MIN_SPAN.max(opts.burn_in + opts.mle.min_usable_obs),
            got: n,
        });
    }
    let y = asylum_pc.window(first, last)?;
    let design: Vec<Vec<f64>> = (first..=last).map(|t| vec![gdp_pc.get(t - lag).unwrap()]).collect();
    let template = StateSpaceSpec::random_walk_coefficients(design, 1.0, vec![1.0]).with_burn_in(opts.burn_in);
    let free = [
        FreeVariance::new("sigma2_eps", VarianceTarget::Measurement),
        FreeVariance::new("sigma2_rho", VarianceTarget::State(0)),
    ];
    let mle = fit_mle(&template, &free, &y, &opts.mle)?;
    let run = smooth(&filter(&mle.fitted_spec, &y)?, &mle.fitted_spec)?;

    let from = first + opts.burn_in as i32;
    let country = asylum_pc.country();
    let keep = |v: Vec<f64>, unit| -> Result<Series, ModelError> {
        Ok(AnnualSeries::new(country, first, v, unit)?.window(from, last)?)
    };
    let crude: Vec<f64> = (from..=last)
        .map(|t| asylum_pc.get(t).unwrap() / gdp_pc.get(t).unwrap())
        .collect();
    Ok(RatioFit {
        crude: AnnualSeries::new(country, from, crude, Unit::Ratio)?,
        smoothed: keep(run.state_path(0), Unit::Ratio)?,
        smoothed_var: keep(run.state_variance_path(0).into_iter().map(|v| v.max(0.0)).collect(), Unit::Ratio)?,
        filtered: keep(run.filtered_mean.iter().map(|a| a[0]).collect(), Unit::Ratio)?,
        variances: mle.variance_estimates,
        loglik: mle.loglik_at_optimum,
        converged: mle.converged,
        gdp_lag: opts.ratio_lag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::sample_variance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gdp(n: usize) -> Series {
        let v = (0..n).map(|t| 90.0 + 2.0 * t as f64 + 3.0 * ((t as f64) * 0.7).sin()).collect();
        AnnualSeries::new("T", 1990, v, Unit::PpsIndex).unwrap()
    }

    #[test]
    fn exact_proportionality() {
        let x = gdp(15);
        let y = x.map(Unit::PerCapita10k, |v| 0.4 * v).unwrap();
        let opts = ModelOptions { ratio_lag: 0, ..Default::default() };
        let f = fit_ratio_model(&y, &x, &opts).unwrap();
        for (&c, &s) in f.crude.values().iter().zip(f.smoothed.values()) {
            assert!((c - 0.4).abs() < 1e-12);
            assert!((s - 0.4).abs() < 1e-6, "{s}");
        }
        assert_eq!(f.variances[1].value, 0.0);
    }

    #[test]
    fn smoothing_reduces_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let x = gdp(25);
        let y: Vec<f64> = x
            .values()
            .iter()
            .map(|v| {
                let e: f64 = StandardNormal.sample(&mut rng);
                (1.0 + 0.2 * e) * v
            })
            .collect();
        let y = AnnualSeries::new("T", 1990, y, Unit::PerCapita10k).unwrap();
        let opts = ModelOptions { ratio_lag: 0, ..Default::default() };
        let f = fit_ratio_model(&y, &x, &opts).unwrap();
        assert!(sample_variance(f.smoothed.values()) < sample_variance(f.crude.values()));
    }

    #[test]
    fn spans_line_up_after_burn_in() {
        let x = gdp(20);
        let y = AnnualSeries::new("T", 1992, (0..18).map(|t| 50.0 + (t % 5) as f64).collect(), Unit::PerCapita10k).unwrap();
        let f = fit_ratio_model(&y, &x, &ModelOptions::default()).unwrap();
        assert_eq!(f.crude.start_year(), 1994);
        assert_eq!(f.smoothed.start_year(), 1994);
        assert_eq!(f.crude.len(), f.smoothed.len());
        assert!(f.smoothed_var.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn scale_equivariance() {
        let x = gdp(20);
        let y = AnnualSeries::new("T", 1990, (0..20).map(|t| 50.0 + ((t * 7) % 5) as f64).collect(), Unit::PerCapita10k).unwrap();
        let opts = ModelOptions::default();
        let a = fit_ratio_model(&y, &x, &opts).unwrap();
        let b = fit_ratio_model(&y.map(Unit::PerCapita10k, |v| 4.0 * v).unwrap(), &x, &opts).unwrap();
        for (p, q) in a.smoothed.values().iter().zip(b.smoothed.values()) {
            assert!((4.0 * p - q).abs() < 1e-4 * q.abs(), "{p} {q}");
        }
        for (p, q) in a.crude.values().iter().zip(b.crude.values()) {
            assert_eq!(4.0 * p, *q);
        }
    }

    #[test]
    fn too_short() {
        let x = gdp(8);
        let y = x.clone();
        assert!(matches!(
            fit_ratio_model(&y, &x, &ModelOptions::default()),
            Err(ModelError::SpanTooShort { .. })
        ));
    }
}
