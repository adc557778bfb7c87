use serde::Serialize;

use super::ols::{f_from_rss, fit_columns, ols, FTest, RegressionFit};
use super::{Decision, EconError, Reference, TestOutcome};
use crate::Series;

pub const BOUNDS_LO: f64 = 3.79;
pub const BOUNDS_HI: f64 = 4.85;
pub const CAUSALITY_THRESHOLD: f64 = 0.95;
const MAX_CAUSALITY_LAG: usize = 4;

/// Bounds-test rule: below the lower bound no cointegration, above the upper
/// bound cointegration, otherwise inconclusive.
pub fn bounds_decision(f: f64, lo: f64, hi: f64) -> Decision {
    if f < lo {
        Decision::Accept
    } else if f > hi {
        Decision::Reject
    } else {
        Decision::Undecided
    }
}

/// Values of `y` and `x` on their common span.
fn common(y: &Series, x: &Series) -> Result<(i32, Vec<f64>, Vec<f64>), EconError> {
    let pairs = y.aligned(x);
    if pairs.is_empty() {
        return Err(EconError::SpanTooShort { needed: 1, got: 0 });
    }
    let start = pairs[0].0;
    Ok((start, pairs.iter().map(|p| p.1).collect(), pairs.iter().map(|p| p.2).collect()))
}

fn diffs(v: &[f64]) -> Vec<f64> {
    // d[t] = v[t] - v[t-1], with d[0] unused
    let mut d = vec![f64::NAN; v.len()];
    for t in 1..v.len() {
        d[t] = v[t] - v[t - 1];
    }
    d
}

/// Conditional error-correction F test for a level relationship between `y`
/// and `x`, with `p - 1` lagged differences of `y` and `p` differences of `x`
/// (current included).
pub fn ardl_bounds_test(y: &Series, x: &Series, p: usize, bounds: (f64, f64)) -> Result<TestOutcome, EconError> {
    if p == 0 {
        return Err(EconError::InvalidArgument("bounds test lag must be at least 1".into()));
    }
    let (start, yv, xv) = common(y, x)?;
    let n = yv.len();
    let k_full = 3 + (p - 1) + p;
    if n < p + k_full + 1 {
        return Err(EconError::SpanTooShort {
            needed: p + k_full + 1,
            got: n,
        });
    }
    let dy = diffs(&yv);
    let dx = diffs(&xv);
    let rows = p..n;
    let m = n - p;
    let dep: Vec<f64> = rows.clone().map(|t| dy[t]).collect();
    let mut names = vec!["const".to_string()];
    let mut cols = vec![vec![1.0; m]];
    for i in 1..p {
        names.push(format!("dy_lag{i}"));
        cols.push(rows.clone().map(|t| dy[t - i]).collect());
    }
    for i in 0..p {
        names.push(format!("dx_lag{i}"));
        cols.push(rows.clone().map(|t| dx[t - i]).collect());
    }
    let restricted = fit_columns(y.country(), start + p as i32, &dep, names.clone(), &cols)?;
    names.push("x_level_lag".into());
    cols.push(rows.clone().map(|t| xv[t - 1]).collect());
    names.push("y_level_lag".into());
    cols.push(rows.clone().map(|t| yv[t - 1]).collect());
    let full = fit_columns(y.country(), start + p as i32, &dep, names, &cols)?;
    let f = f_from_rss(restricted.rss, full.rss, 2, full.df_resid);
    let (lo, hi) = bounds;
    Ok(TestOutcome {
        name: "ardl_bounds".into(),
        statistic: f.statistic,
        reference: Reference::Bounds { lower: lo, upper: hi },
        decision: bounds_decision(f.statistic, lo, hi),
        alpha: 0.05,
        detail: format!("p={p}; n={m}; Accept means no level relationship"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CausalDirection {
    None,
    AsylumToGdp,
    GdpToAsylum,
    Bidirectional,
}

impl CausalDirection {
    pub fn from_sides(asylum_to_gdp: bool, gdp_to_asylum: bool) -> Self {
        match (asylum_to_gdp, gdp_to_asylum) {
            (true, true) => Self::Bidirectional,
            (true, false) => Self::AsylumToGdp,
            (false, true) => Self::GdpToAsylum,
            (false, false) => Self::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionStat {
    pub f_prob: f64,
    pub lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalityResult {
    pub direction: CausalDirection,
    pub asylum_to_gdp: DirectionStat,
    pub gdp_to_asylum: DirectionStat,
    pub threshold: f64,
    pub form: GrangerForm,
    pub ect_included: bool,
    /// Two-sided p-value of the error-correction term at the selected lag.
    pub ect_significance: Option<f64>,
}

struct EcmFits {
    full: RegressionFit,
    restricted: RegressionFit,
}

/// `dep` regressed on its own lags and the other variable's lags `1..=p`
/// (optionally plus the lagged error-correction term); the restricted model
/// drops the other variable's lags.
fn ecm_pair(
    country: &str,
    start: i32,
    d_own: &[f64],
    d_other: &[f64],
    ect: Option<&[f64]>,
    p: usize,
) -> Result<EcmFits, EconError> {
    let n = d_own.len();
    let first = p;
    if n <= first {
        return Err(EconError::SpanTooShort { needed: first + 1, got: n });
    }
    let rows = first..n;
    let m = n - first;
    let dep: Vec<f64> = rows.clone().map(|t| d_own[t]).collect();
    let mut names = vec!["const".to_string()];
    let mut cols = vec![vec![1.0; m]];
    for i in 1..=p {
        names.push(format!("own_lag{i}"));
        cols.push(rows.clone().map(|t| d_own[t - i]).collect());
    }
    if let Some(e) = ect {
        names.push("ect".into());
        cols.push(rows.clone().map(|t| e[t - 1]).collect());
    }
    let restricted = fit_columns(country, start + first as i32, &dep, names.clone(), &cols)?;
    for i in 1..=p {
        names.push(format!("other_lag{i}"));
        cols.push(rows.clone().map(|t| d_other[t - i]).collect());
    }
    let full = fit_columns(country, start + first as i32, &dep, names, &cols)?;
    Ok(EcmFits { full, restricted })
}

fn f_of(fits: &EcmFits, p: usize) -> FTest {
    f_from_rss(fits.restricted.rss, fits.full.rss, p, fits.full.df_resid)
}

/// How the causality regressions treat the two series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrangerForm {
    /// First differences, optionally with the lagged error-correction term.
    Differenced { include_ect: bool },
    /// Levels, for series that are both stationary.
    Levels,
}

/// Error-correction Granger causality between `y` (asylum) and `x` (GDP),
/// searching lags 1..=4 and keeping the largest F-probability per direction.
/// With `include_ect`, the lagged residual of the static regression of `y` on
/// `x` enters the `y` equation.
pub fn granger_ecm(y: &Series, x: &Series, include_ect: bool, threshold: f64) -> Result<CausalityResult, EconError> {
    granger_causality(y, x, GrangerForm::Differenced { include_ect }, threshold, MAX_CAUSALITY_LAG)
}

pub fn granger_causality(
    y: &Series,
    x: &Series,
    form: GrangerForm,
    threshold: f64,
    max_lag: usize,
) -> Result<CausalityResult, EconError> {
    if max_lag == 0 {
        return Err(EconError::InvalidArgument("causality lag range is empty".into()));
    }
    let (start, yv, xv) = common(y, x)?;
    let include_ect = matches!(form, GrangerForm::Differenced { include_ect: true });
    let (dy, dx, offset) = match form {
        GrangerForm::Differenced { .. } => (diffs(&yv)[1..].to_vec(), diffs(&xv)[1..].to_vec(), 1),
        GrangerForm::Levels => (yv.clone(), xv.clone(), 0),
    };
    let ect: Option<Vec<f64>> = if include_ect {
        let yy = y.window(start, start + yv.len() as i32 - 1)?;
        let xx = x.window(start, start + xv.len() as i32 - 1)?;
        // aligned with the differenced rows: entry t is the residual of year t
        Some(ols(&yy, &[("x", &xx)], true)?.residuals.values()[1..].to_vec())
    } else {
        None
    };
    let start = start + offset;

    let mut g2a: Option<(DirectionStat, Option<f64>)> = None;
    let mut a2g: Option<DirectionStat> = None;
    let mut last_err = None;
    for p in 1..=max_lag {
        let y_eq = ecm_pair(y.country(), start, &dy, &dx, ect.as_deref(), p);
        let x_eq = ecm_pair(y.country(), start, &dx, &dy, None, p);
        match (y_eq, x_eq) {
            (Ok(ye), Ok(xe)) => {
                let fy = f_of(&ye, p);
                if g2a.as_ref().is_none_or(|(b, _)| fy.f_prob > b.f_prob) {
                    let sig = ect.as_ref().and_then(|_| ye.full.t_pvalue("ect"));
                    g2a = Some((DirectionStat { f_prob: fy.f_prob, lag: p }, sig));
                }
                let fx = f_of(&xe, p);
                if a2g.is_none_or(|b| fx.f_prob > b.f_prob) {
                    a2g = Some(DirectionStat { f_prob: fx.f_prob, lag: p });
                }
            }
            (Err(e), _) | (_, Err(e)) => last_err = Some(e),
        }
    }
    let (Some((gdp_to_asylum, ect_significance)), Some(asylum_to_gdp)) = (g2a, a2g) else {
        return Err(last_err.unwrap_or(EconError::SpanTooShort { needed: 5, got: yv.len() }));
    };
    Ok(CausalityResult {
        direction: CausalDirection::from_sides(
            asylum_to_gdp.f_prob >= threshold,
            gdp_to_asylum.f_prob >= threshold,
        ),
        asylum_to_gdp,
        gdp_to_asylum,
        threshold,
        form,
        ect_included: include_ect,
        ect_significance,
    })
}
