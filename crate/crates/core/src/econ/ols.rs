use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::{Decision, EconError, Reference, TestOutcome};
use crate::linalg::{lstsq, LinalgError, Matrix};
use crate::series::{AnnualSeries, Unit};
use crate::Series;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Series,
    pub rss: f64,
    /// Centered total sum of squares of the dependent variable.
    pub tss: f64,
    pub df_resid: usize,
    #[serde(skip)]
    pub xtx_inv: Matrix<f64>,
}

impl RegressionFit {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.coefficients[i])
    }

    pub fn t_stat(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.coefficients[i] / self.std_errors[i])
    }

    /// Two-sided p-value of the coefficient t-test.
    pub fn t_pvalue(&self, name: &str) -> Option<f64> {
        let t = self.t_stat(name)?;
        if t.is_nan() {
            return None;
        }
        let dist = StudentsT::new(0.0, 1.0, self.df_resid as f64).ok()?;
        Some(2.0 * (1.0 - dist.cdf(t.abs())))
    }

    pub fn sigma2(&self) -> f64 {
        self.rss / self.df_resid as f64
    }

    pub fn r_squared(&self) -> f64 {
        if self.tss > 0.0 {
            1.0 - self.rss / self.tss
        } else {
            0.0
        }
    }
}

/// Fits `y` on explicit columns. Row `i` belongs to `start_year + i`.
pub(crate) fn fit_columns(
    country: &str,
    start_year: i32,
    y: &[f64],
    names: Vec<String>,
    columns: &[Vec<f64>],
) -> Result<RegressionFit, EconError> {
    let n = y.len();
    let k = columns.len();
    if n <= k || k == 0 {
        return Err(EconError::SpanTooShort {
            needed: k + 1,
            got: n,
        });
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let x = Matrix::from_rows(&rows);
    let fit = lstsq(&x, y).map_err(|e| match e {
        LinalgError::RankDeficient { column } => EconError::RankDeficient {
            column: names[column].clone(),
        },
        _ => EconError::SpanTooShort {
            needed: k + 1,
            got: n,
        },
    })?;
    let df_resid = n - k;
    let sigma2 = fit.rss / df_resid as f64;
    let std_errors = (0..k).map(|j| (sigma2 * fit.xtx_inv[(j, j)]).sqrt()).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let residuals = AnnualSeries::new(country, start_year, fit.residuals, Unit::Ratio)?;
    Ok(RegressionFit {
        names,
        coefficients: fit.coefficients,
        std_errors,
        residuals,
        rss: fit.rss,
        tss,
        df_resid,
        xtx_inv: fit.xtx_inv,
    })
}

/// Least squares of `y` on the named regressors over their common span.
pub fn ols(y: &Series, regressors: &[(&str, &Series)], intercept: bool) -> Result<RegressionFit, EconError> {
    let mut lo = y.start_year();
    let mut hi = y.end_year();
    for (_, r) in regressors {
        lo = lo.max(r.start_year());
        hi = hi.min(r.end_year());
    }
    let k = regressors.len() + usize::from(intercept);
    if hi < lo {
        return Err(EconError::SpanTooShort { needed: k + 1, got: 0 });
    }
    let years = lo..=hi;
    let yv: Vec<f64> = years.clone().map(|t| y.get(t).unwrap()).collect();
    let mut names = Vec::with_capacity(k);
    let mut cols = Vec::with_capacity(k);
    if intercept {
        names.push("const".to_string());
        cols.push(vec![1.0; yv.len()]);
    }
    for (name, r) in regressors {
        names.push(name.to_string());
        cols.push(years.clone().map(|t| r.get(t).unwrap()).collect());
    }
    fit_columns(y.country(), lo, &yv, names, &cols)
}

/// Nested-model F statistic and `f_prob = P(F <= f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FTest {
    pub statistic: f64,
    pub q: usize,
    pub df_resid: usize,
    pub f_prob: f64,
}

impl FTest {
    /// Rejects the restriction when `f_prob >= 1 - alpha`.
    pub fn outcome(&self, name: &str, alpha: f64) -> TestOutcome {
        TestOutcome {
            name: name.to_string(),
            statistic: self.statistic,
            reference: Reference::FDist {
                df1: self.q,
                df2: self.df_resid,
            },
            decision: if self.f_prob >= 1.0 - alpha {
                Decision::Reject
            } else {
                Decision::Accept
            },
            alpha,
            detail: format!("f_prob={:.6}; classical F reference", self.f_prob),
        }
    }
}

pub(crate) fn f_from_rss(rss_r: f64, rss_f: f64, q: usize, df: usize) -> FTest {
    if q == 0 {
        return FTest {
            statistic: 0.0,
            q,
            df_resid: df,
            f_prob: 0.0,
        };
    }
    let num = (rss_r - rss_f).max(0.0) / q as f64;
    let statistic = if num == 0.0 { 0.0 } else { num / (rss_f / df as f64) };
    let f_prob = if statistic.is_finite() {
        FisherSnedecor::new(q as f64, df as f64)
            .map(|d| d.cdf(statistic))
            .unwrap_or(f64::NAN)
    } else {
        1.0
    };
    FTest {
        statistic,
        q,
        df_resid: df,
        f_prob,
    }
}

/// F test of `restricted` against `full`; the restricted regressors must be a
/// subset of the full ones, estimated on the same years.
pub fn f_test_nested(full: &RegressionFit, restricted: &RegressionFit) -> Result<FTest, EconError> {
    let same_sample = full.residuals.start_year() == restricted.residuals.start_year()
        && full.n_obs() == restricted.n_obs();
    let nested = restricted.names.iter().all(|n| full.names.contains(n))
        && restricted.names.len() <= full.names.len();
    if !same_sample || !nested {
        return Err(EconError::SpanMismatch);
    }
    let q = full.names.len() - restricted.names.len();
    Ok(f_from_rss(restricted.rss, full.rss, q, full.df_resid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(start: i32, v: Vec<f64>) -> Series {
        AnnualSeries::new("T", start, v, Unit::Ratio).unwrap()
    }

    #[test]
    fn exact_fit_through_origin() {
        let x = s(2000, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = x.map(Unit::Ratio, |v| 2.0 * v).unwrap();
        let f = ols(&y, &[("x", &x)], false).unwrap();
        assert_abs_diff_eq!(f.coefficient("x").unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.rss, 0.0, epsilon = 1e-20);
        assert_eq!(f.df_resid, 4);
    }

    #[test]
    fn collinear_regressors() {
        let x = s(2000, vec![1.0, 2.0, 4.0, 3.0, 5.0]);
        let y = s(2000, vec![2.0, 4.0, 8.0, 6.0, 10.0]);
        let r = ols(&y, &[("x1", &x), ("x2", &x)], false);
        assert!(matches!(r, Err(EconError::RankDeficient { .. })));
    }

    #[test]
    fn aligns_on_common_span() {
        let x = s(1998, (0..10).map(|v| v as f64).collect());
        let y = s(2000, vec![1.0, 3.0, 2.0, 5.0, 4.0]);
        let f = ols(&y, &[("x", &x)], true).unwrap();
        assert_eq!(f.residuals.start_year(), 2000);
        assert_eq!(f.n_obs(), 5);
    }

    fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let k = rows[0].len();
        let mut a = vec![vec![0.0; k + 1]; k];
        for (r, &yi) in rows.iter().zip(y) {
            for i in 0..k {
                for j in 0..k {
                    a[i][j] += r[i] * r[j];
                }
                a[i][k] += r[i] * yi;
            }
        }
        // Gauss-Jordan with partial pivoting
        for c in 0..k {
            let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            let pivot = a[c].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i != c {
                    let f = row[c] / pivot[c];
                    for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                        *x -= f * p;
                    }
                }
            }
        }
        (0..k).map(|i| a[i][k] / a[i][i]).collect()
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let y: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
            let cols: Vec<Vec<f64>> = (0..3).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
            let names = vec!["a".into(), "b".into(), "c".into()];
            let f = fit_columns("T", 2000, &y, names, &cols).unwrap();
            let oracle = normal_equations(&rows, &y);
            for (b, o) in f.coefficients.iter().zip(&oracle) {
                assert_abs_diff_eq!(b, o, epsilon = 1e-8);
            }
            let rss: f64 = f.residuals.values().iter().map(|e| e * e).sum();
            assert_abs_diff_eq!(rss, f.rss, epsilon = 1e-10);
        }
    }

    #[test]
    fn f_test_identity_and_hand_value() {
        let x = s(2000, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let y = s(2000, vec![1.2, 1.9, 3.4, 3.8, 5.3, 5.9, 7.4, 7.7]);
        let full = ols(&y, &[("x", &x)], true).unwrap();
        let same = f_test_nested(&full, &full).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.f_prob, 0.0);

        let ones = s(2000, vec![1.0; 8]);
        let restricted = fit_columns("T", 2000, y.values(), vec!["const".into()], &[ones.values().to_vec()]).unwrap();
        let t = f_test_nested(&full, &restricted).unwrap();
        let hand = (restricted.rss - full.rss) / 1.0 / (full.rss / 6.0);
        assert_abs_diff_eq!(t.statistic, hand, epsilon = 1e-10);
        assert_eq!((t.q, t.df_resid), (1, 6));
    }

    #[test]
    fn f_prob_reference_value() {
        // P(F(2,10) <= 4.10) = 1 - (1 + 2*4.10/10)^(-5)
        let t = f_from_rss(1.0 + 0.82, 1.0, 2, 10);
        assert_abs_diff_eq!(t.statistic, 4.10, epsilon = 1e-12);
        let exact = 1.0 - (1.0f64 + 0.82).powi(-5);
        assert_abs_diff_eq!(t.f_prob, exact, epsilon = 1e-9);
        assert!((t.f_prob - 0.95).abs() < 0.005);
    }

    #[test]
    fn mismatched_samples_rejected() {
        let x = s(2000, (0..8).map(|v| v as f64).collect());
        let y = s(2000, vec![1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 8.0, 7.0]);
        let full = ols(&y, &[("x", &x)], true).unwrap();
        let short = ols(&y.window(2001, 2007).unwrap(), &[], true).unwrap();
        assert_eq!(f_test_nested(&full, &short), Err(EconError::SpanMismatch));
    }

    proptest::proptest! {
        #[test]
        fn f_statistic_is_nonnegative(rss_f in 0.01f64..10.0, extra in 0.0f64..10.0, q in 1usize..4, df in 1usize..30) {
            let t = f_from_rss(rss_f + extra, rss_f, q, df);
            proptest::prop_assert!(t.statistic >= 0.0);
            proptest::prop_assert_eq!(t.statistic == 0.0, extra == 0.0);
            proptest::prop_assert!((0.0..=1.0).contains(&t.f_prob));
        }
    }
}
