use serde::Serialize;

use super::ols::fit_columns;
use super::EconError;
use crate::Series;

pub(crate) const MIN_LEN: usize = 8;

/// MacKinnon response-surface coefficients `(b_inf, b1, b2, b3)`.
type Surface = [f64; 4];

const ADF_CONST: [(f64, Surface); 3] = [
    (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
    (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
    (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
];

const DF_NO_CONST: [(f64, Surface); 3] = [
    (0.01, [-2.56574, -2.2358, -3.627, 0.0]),
    (0.05, [-1.94100, -0.2686, -3.365, 31.223]),
    (0.10, [-1.61682, 0.2656, -2.714, 25.364]),
];

/// Local-to-unity constant for GLS demeaning.
const DFGLS_CBAR: f64 = -7.0;

fn surface(table: &[(f64, Surface); 3], alpha: f64) -> Result<Surface, EconError> {
    table
        .iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-9)
        .map(|(_, s)| *s)
        .ok_or(EconError::UnsupportedAlpha(alpha))
}

fn critical(s: &Surface, nobs: usize) -> f64 {
    let t = nobs as f64;
    s[0] + s[1] / t + s[2] / (t * t) + s[3] / (t * t * t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationVerdict {
    /// 0, 1, or 2 meaning two or more.
    pub order: u8,
    pub level_stat: f64,
    pub diff_stat: f64,
    pub level_critical: f64,
    pub diff_critical: f64,
    /// Lagged differences in the level regression.
    pub lags_used: usize,
    pub alpha: f64,
}

struct DfStat {
    stat: f64,
    lags: usize,
    nobs: usize,
}

/// Dickey-Fuller t statistic on `v[t-1]` with AIC-selected augmentation.
fn df_regression(v: &[f64], constant: bool) -> Result<DfStat, EconError> {
    let n = v.len();
    let dv: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let base = 1 + usize::from(constant);
    let mut max_lag = ((n - 1) as f64).cbrt().floor() as usize;
    // the common sample must leave residual degrees of freedom at max_lag
    while max_lag > 0 && n - 1 - max_lag <= base + max_lag {
        max_lag -= 1;
    }
    if n - 1 <= base {
        return Err(EconError::SpanTooShort {
            needed: base + 2,
            got: n,
        });
    }

    let build = |p: usize, first: usize| {
        // regression rows for t = first..n-1
        let rows = first..n;
        let y: Vec<f64> = rows.clone().map(|t| dv[t - 1]).collect();
        let mut names = Vec::new();
        let mut cols = Vec::new();
        if constant {
            names.push("const".to_string());
            cols.push(vec![1.0; y.len()]);
        }
        names.push("level_lag".to_string());
        cols.push(rows.clone().map(|t| v[t - 1]).collect());
        for j in 1..=p {
            names.push(format!("dlag{j}"));
            cols.push(rows.clone().map(|t| dv[t - 1 - j]).collect());
        }
        fit_columns("", first as i32, &y, names, &cols)
    };

    let mut best: Option<(f64, usize)> = None;
    for p in 0..=max_lag {
        let fit = build(p, max_lag + 1)?;
        let m = fit.n_obs() as f64;
        let k = fit.coefficients.len() as f64;
        let aic = m * (fit.rss / m).ln() + 2.0 * k;
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    let lags = best.map_or(0, |b| b.1);
    let fit = build(lags, lags + 1)?;
    Ok(DfStat {
        stat: fit.t_stat("level_lag").unwrap(),
        lags,
        nobs: fit.n_obs(),
    })
}

fn check_len(s: &Series) -> Result<(), EconError> {
    if s.len() < MIN_LEN {
        return Err(EconError::SpanTooShort {
            needed: MIN_LEN,
            got: s.len(),
        });
    }
    Ok(())
}

fn verdict(
    level: DfStat,
    diff: DfStat,
    table: &[(f64, Surface); 3],
    alpha: f64,
) -> Result<IntegrationVerdict, EconError> {
    let s = surface(table, alpha)?;
    let level_critical = critical(&s, level.nobs);
    let diff_critical = critical(&s, diff.nobs);
    let order = if level.stat < level_critical {
        0
    } else if diff.stat < diff_critical {
        1
    } else {
        2
    };
    Ok(IntegrationVerdict {
        order,
        level_stat: level.stat,
        diff_stat: diff.stat,
        level_critical,
        diff_critical,
        lags_used: level.lags,
        alpha,
    })
}

fn differences(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Augmented Dickey-Fuller test with a constant, run on levels and then on
/// first differences to assign the integration order.
pub fn adf_test(s: &Series, alpha: f64) -> Result<IntegrationVerdict, EconError> {
    surface(&ADF_CONST, alpha)?;
    check_len(s)?;
    let v = s.values();
    let level = df_regression(v, true)?;
    let diff = df_regression(&differences(v), true)?;
    verdict(level, diff, &ADF_CONST, alpha)
}

/// GLS demeaning against the local alternative `1 + cbar / n`.
fn gls_demean(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let a = 1.0 + DFGLS_CBAR / n as f64;
    let mut num = v[0];
    let mut den = 1.0;
    for t in 1..n {
        let z = 1.0 - a;
        num += z * (v[t] - a * v[t - 1]);
        den += z * z;
    }
    let beta = num / den;
    v.iter().map(|x| x - beta).collect()
}

/// Elliott-Rothenberg-Stock DF-GLS test, constant-only case.
pub fn dfgls_test(s: &Series, alpha: f64) -> Result<IntegrationVerdict, EconError> {
    surface(&DF_NO_CONST, alpha)?;
    check_len(s)?;
    let v = s.values();
    let level = df_regression(&gls_demean(v), false)?;
    let diff = df_regression(&gls_demean(&differences(v)), false)?;
    verdict(level, diff, &DF_NO_CONST, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{AnnualSeries, Unit};
    use crate::synth::{generate_synthetic, Process, SeedSpec};

    fn gen(seed: u64, process: Process, n: usize) -> Series {
        generate_synthetic::<f64>(&SeedSpec {
            seed,
            process,
            length: n,
            scale: 1.0,
        })
        .single()
    }

    #[test]
    fn random_walk_is_integrated() {
        let s = gen(11, Process::RandomWalk, 200);
        assert!(adf_test(&s, 0.05).unwrap().order >= 1);
        assert!(dfgls_test(&s, 0.05).unwrap().order >= 1);
    }

    #[test]
    fn stationary_ar_is_order_zero() {
        let s = gen(12, Process::Ar1 { phi: 0.3 }, 200);
        let v = adf_test(&s, 0.05).unwrap();
        assert_eq!(v.order, 0);
        assert!(v.level_stat < v.level_critical);
    }

    #[test]
    fn critical_values_at_large_n() {
        let s = surface(&ADF_CONST, 0.05).unwrap();
        assert!((critical(&s, 100_000) + 2.8615).abs() < 1e-3);
        assert!((critical(&s, 100) + 2.891).abs() < 2e-3);
    }

    #[test]
    fn unsupported_alpha() {
        let s = gen(1, Process::RandomWalk, 30);
        assert_eq!(adf_test(&s, 0.2), Err(EconError::UnsupportedAlpha(0.2)));
        assert_eq!(dfgls_test(&s, 0.025), Err(EconError::UnsupportedAlpha(0.025)));
    }

    #[test]
    fn too_short() {
        let s = AnnualSeries::new("T", 2000, vec![1.0, 2.0, 1.5, 3.0, 2.0, 2.5, 3.5], Unit::Ratio).unwrap();
        assert!(matches!(adf_test(&s, 0.05), Err(EconError::SpanTooShort { .. })));
    }

    #[test]
    fn minimal_length_runs() {
        let s = gen(4, Process::Ar1 { phi: 0.5 }, 8);
        adf_test(&s, 0.05).unwrap();
        dfgls_test(&s, 0.05).unwrap();
    }

    #[test]
    fn order_consistent_with_statistics() {
        for seed in 0..30 {
            let s = gen(seed, Process::Ar1 { phi: 0.8 }, 25);
            for v in [adf_test(&s, 0.10).unwrap(), dfgls_test(&s, 0.10).unwrap()] {
                let level_rej = v.level_stat < v.level_critical;
                let diff_rej = v.diff_stat < v.diff_critical;
                assert_eq!(v.order == 0, level_rej);
                assert_eq!(v.order == 1, !level_rej && diff_rej);
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn shift_invariance(seed in 0u64..1000, c in -1e3f64..1e3) {
            let s = gen(seed, Process::RandomWalk, 40);
            let shifted = s.map(Unit::Ratio, |v| v + c).unwrap();
            let a = adf_test(&s, 0.05).unwrap();
            let b = adf_test(&shifted, 0.05).unwrap();
            proptest::prop_assert!((a.level_stat - b.level_stat).abs() < 1e-8);
            let a = dfgls_test(&s, 0.05).unwrap();
            let b = dfgls_test(&shifted, 0.05).unwrap();
            proptest::prop_assert!((a.level_stat - b.level_stat).abs() < 1e-8);
        }
    }
}
