use serde::{Deserialize, Serialize};

use crate::econ::{arch_lm_test, box_pierce, box_pierce_lags, EconError, TestOutcome};
use crate::Series;

/// Denominator for the ARE/SSE percentages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Sum of absolute values of the logged dependent variable.
    LogScale,
    /// Sum of the per-capita index itself.
    PerCapita,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsBlock {
    pub are_pct: f64,
    pub sse_pct: f64,
    pub box_pierce: TestOutcome,
    pub arch: TestOutcome,
}

/// Residual accuracy and specification checks. `scale` supplies the
/// normalizing values for the residual years.
pub fn compute_diagnostics(residuals: &Series, scale: &Series, alpha: f64) -> Result<DiagnosticsBlock, EconError> {
    let pairs = residuals.aligned(scale);
    let abs_e: f64 = pairs.iter().map(|p| p.1.abs()).sum();
    let sq_e: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let den: f64 = pairs.iter().map(|p| p.2.abs()).sum();
    let pct = |num: f64| if num == 0.0 { 0.0 } else { 100.0 * num / den };
    Ok(DiagnosticsBlock {
        are_pct: pct(abs_e),
        sse_pct: pct(sq_e),
        box_pierce: box_pierce(residuals, box_pierce_lags(residuals.len()), alpha)?,
        arch: arch_lm_test(residuals, 1, alpha)?,
    })
}
