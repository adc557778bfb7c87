use serde::Serialize;

use super::ModelError;
use crate::econ::{ols, EconError};
use crate::series::{lag, log_transform};
use crate::Series;

const MIN_OVERLAP: usize = 4;

/// `log Y_t = mu + omega * log X_{t-lag}` by least squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLogFit {
    pub mu: f64,
    pub omega: f64,
    pub residuals: Series,
    pub r_squared: f64,
    pub gdp_lag: usize,
}

pub fn fit_loglog(asylum_pc: &Series, gdp_pc: &Series) -> Result<LogLogFit, ModelError> {
    fit_loglog_lagged(asylum_pc, gdp_pc, 0)
}

pub fn fit_loglog_lagged(asylum_pc: &Series, gdp_pc: &Series, gdp_lag: usize) -> Result<LogLogFit, ModelError> {
    let y = log_transform(asylum_pc)?;
    let x = lag(&log_transform(gdp_pc)?, gdp_lag)?;
    let pairs = y.aligned(&x);
    if pairs.len() < MIN_OVERLAP {
        return Err(ModelError::SpanTooShort {
            needed: MIN_OVERLAP,
            got: pairs.len(),
        });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    if xs.iter().all(|&v| v == xs[0]) {
        return Err(ModelError::DegenerateRegressor);
    }
    let fit = ols(&y, &[("x", &x)], true).map_err(|e| match e {
        EconError::RankDeficient { .. } => ModelError::DegenerateRegressor,
        e => e.into(),
    })?;
    Ok(LogLogFit {
        mu: fit.coefficient("const").unwrap(),
        omega: fit.coefficient("x").unwrap(),
        r_squared: fit.r_squared(),
        residuals: fit.residuals,
        gdp_lag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{AnnualSeries, Unit};

    fn gdp() -> Series {
        AnnualSeries::new("T", 2000, vec![90.0, 95.0, 101.0, 99.0, 104.0, 110.0, 108.0], Unit::PpsIndex).unwrap()
    }

    #[test]
    fn exact_power_law() {
        let x = gdp();
        let y = x.map(Unit::PerCapita10k, |v| (0.3 + 1.2 * v.ln()).exp()).unwrap();
        let f = fit_loglog(&y, &x).unwrap();
        assert!((f.mu - 0.3).abs() < 1e-9);
        assert!((f.omega - 1.2).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_have_zero_mean() {
        let x = gdp();
        let y = AnnualSeries::new("T", 2000, vec![3.0, 2.0, 5.0, 4.0, 6.0, 4.5, 7.0], Unit::PerCapita10k).unwrap();
        let f = fit_loglog(&y, &x).unwrap();
        assert!(f.residuals.mean().abs() < 1e-10);
    }

    #[test]
    fn scaling_asylum_only_moves_intercept() {
        let x = gdp();
        let y = AnnualSeries::new("T", 2000, vec![3.0, 2.0, 5.0, 4.0, 6.0, 4.5, 7.0], Unit::PerCapita10k).unwrap();
        let a = fit_loglog(&y, &x).unwrap();
        let b = fit_loglog(&y.map(Unit::PerCapita10k, |v| 7.5 * v).unwrap(), &x).unwrap();
        assert!((a.omega - b.omega).abs() < 1e-10);
        assert!((b.mu - a.mu - 7.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn constant_gdp_is_degenerate() {
        let x = gdp().map(Unit::PpsIndex, |_| 100.0).unwrap();
        let y = AnnualSeries::new("T", 2000, vec![3.0, 2.0, 5.0, 4.0, 6.0, 4.5, 7.0], Unit::PerCapita10k).unwrap();
        assert_eq!(fit_loglog(&y, &x), Err(ModelError::DegenerateRegressor));
    }

    #[test]
    fn lagged_alignment() {
        let x = gdp();
        let y = AnnualSeries::new("T", 2000, vec![3.0, 2.0, 5.0, 4.0, 6.0, 4.5, 7.0], Unit::PerCapita10k).unwrap();
        let f = fit_loglog_lagged(&y, &x, 1).unwrap();
        assert_eq!(f.residuals.start_year(), 2001);
        assert_eq!(f.residuals.len(), 6);
    }
}
