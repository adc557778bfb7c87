use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::ols::fit_columns;
use super::{Decision, EconError, Reference, TestOutcome};
use crate::Series;

fn chi2_critical(df: usize, alpha: f64) -> Result<f64, EconError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EconError::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    let d = ChiSquared::new(df as f64).map_err(|e| EconError::InvalidArgument(e.to_string()))?;
    Ok(d.inverse_cdf(1.0 - alpha))
}

/// Default portmanteau lag count for short annual series.
pub fn box_pierce_lags(n: usize) -> usize {
    (n / 4).clamp(1, 5)
}

/// Box-Pierce portmanteau test; `Accept` means no residual autocorrelation.
pub fn box_pierce(residuals: &Series, m: usize, alpha: f64) -> Result<TestOutcome, EconError> {
    let e = residuals.values();
    let n = e.len();
    if m == 0 || n <= m {
        return Err(EconError::SpanTooShort { needed: m.max(1) + 1, got: n });
    }
    let mean = e.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = e.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    let q = if c0 > 0.0 {
        let sum_r2: f64 = (1..=m)
            .map(|k| {
                let ck: f64 = (k..n).map(|t| c[t] * c[t - k]).sum();
                (ck / c0).powi(2)
            })
            .sum();
        n as f64 * sum_r2
    } else {
        0.0
    };
    let critical = chi2_critical(m, alpha)?;
    Ok(TestOutcome {
        name: "box_pierce".into(),
        statistic: q,
        reference: Reference::ChiSquare { df: m, critical },
        decision: if q > critical { Decision::Reject } else { Decision::Accept },
        alpha,
        detail: format!("m={m}; n={n}"),
    })
}

/// Engle LM test for ARCH(q) on the squared residuals. `Accept` means the
/// conditional variance is time-varying (statistic above the quantile).
pub fn arch_lm_test(residuals: &Series, q: usize, alpha: f64) -> Result<TestOutcome, EconError> {
    let e = residuals.values();
    if q == 0 || e.len() <= q + 2 {
        return Err(EconError::SpanTooShort { needed: q.max(1) + 3, got: e.len() });
    }
    let sq: Vec<f64> = e.iter().map(|v| v * v).collect();
    let n = sq.len() - q;
    let dep = &sq[q..];
    let mean = dep.iter().sum::<f64>() / n as f64;
    let tss: f64 = dep.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r2 = if tss > 0.0 {
        let mut names = vec!["const".to_string()];
        let mut cols = vec![vec![1.0; n]];
        for i in 1..=q {
            names.push(format!("sq_lag{i}"));
            cols.push((q..sq.len()).map(|t| sq[t - i]).collect());
        }
        match fit_columns(residuals.country(), residuals.start_year() + q as i32, dep, names, &cols) {
            Ok(fit) => fit.r_squared().max(0.0),
            // lagged squares constant: nothing explains the variance
            Err(EconError::RankDeficient { .. }) => 0.0,
            Err(e) => return Err(e),
        }
    } else {
        0.0
    };
    let stat = n as f64 * r2;
    let critical = chi2_critical(q, alpha)?;
    Ok(TestOutcome {
        name: "arch_lm".into(),
        statistic: stat,
        reference: Reference::ChiSquare { df: q, critical },
        decision: if stat > critical { Decision::Accept } else { Decision::Reject },
        alpha,
        detail: format!("q={q}; R2={r2:.6}; Accept means ARCH present"),
    })
}
