use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::models::Normalization;

/// Run parameters; parsed from a flat `key = value` file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub alpha_unit_root: f64,
    pub bounds_lo: f64,
    pub bounds_hi: f64,
    pub ardl_lag: usize,
    pub causality_max_lag: usize,
    pub causality_threshold: f64,
    pub ect_alpha: f64,
    pub burn_in: usize,
    pub baseline_country: String,
    pub ratio_lag: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub diagnostics_alpha: f64,
    pub group_alpha: f64,
    pub relative_from: i32,
    pub relative_to: i32,
    pub elasticity_from: i32,
    pub elasticity_to: i32,
    pub recent_from: i32,
    pub recent_to: i32,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            alpha_unit_root: 0.05,
            bounds_lo: 3.79,
            bounds_hi: 4.85,
            ardl_lag: 2,
            causality_max_lag: 4,
            causality_threshold: 0.95,
            ect_alpha: 0.10,
            burn_in: 2,
            baseline_country: "IE".into(),
            ratio_lag: 1,
            seed: 0,
            normalization: Normalization::LogScale,
            diagnostics_alpha: 0.05,
            group_alpha: 0.05,
            relative_from: 1997,
            relative_to: 2009,
            elasticity_from: 1998,
            elasticity_to: 2009,
            recent_from: 2006,
            recent_to: 2009,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, PipelineError> {
    value.parse().map_err(|_| PipelineError::Config {
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(PipelineError::Config {
                    line,
                    message: "expected key = value".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "alpha_unit_root" => c.alpha_unit_root = parse_value(line, key, value)?,
                "bounds_lo" => c.bounds_lo = parse_value(line, key, value)?,
                "bounds_hi" => c.bounds_hi = parse_value(line, key, value)?,
                "ardl_lag" => c.ardl_lag = parse_value(line, key, value)?,
                "causality_max_lag" => c.causality_max_lag = parse_value(line, key, value)?,
                "causality_threshold" => c.causality_threshold = parse_value(line, key, value)?,
                "ect_alpha" => c.ect_alpha = parse_value(line, key, value)?,
                "burn_in" => c.burn_in = parse_value(line, key, value)?,
                "baseline_country" => c.baseline_country = value.to_string(),
                "ratio_lag" => c.ratio_lag = parse_value(line, key, value)?,
                "seed" => c.seed = parse_value(line, key, value)?,
                "normalization" => {
                    c.normalization = match value {
                        "log_scale" => Normalization::LogScale,
                        "per_capita" => Normalization::PerCapita,
                        _ => {
                            return Err(PipelineError::Config {
                                line,
                                message: format!("normalization must be log_scale or per_capita, got {value:?}"),
                            })
                        }
                    }
                }
                "diagnostics_alpha" => c.diagnostics_alpha = parse_value(line, key, value)?,
                "group_alpha" => c.group_alpha = parse_value(line, key, value)?,
                "relative_from" => c.relative_from = parse_value(line, key, value)?,
                "relative_to" => c.relative_to = parse_value(line, key, value)?,
                "elasticity_from" => c.elasticity_from = parse_value(line, key, value)?,
                "elasticity_to" => c.elasticity_to = parse_value(line, key, value)?,
                "recent_from" => c.recent_from = parse_value(line, key, value)?,
                "recent_to" => c.recent_to = parse_value(line, key, value)?,
                _ => {
                    return Err(PipelineError::Config {
                        line,
                        message: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |message: String| Err(PipelineError::Config { line: 0, message });
        if !(self.bounds_lo < self.bounds_hi) {
            return bad("bounds_lo must be below bounds_hi".into());
        }
        for (name, a) in [
            ("alpha_unit_root", self.alpha_unit_root),
            ("causality_threshold", self.causality_threshold),
            ("ect_alpha", self.ect_alpha),
            ("diagnostics_alpha", self.diagnostics_alpha),
            ("group_alpha", self.group_alpha),
        ] {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("{name} must lie in (0, 1)"));
            }
        }
        if self.ratio_lag > 1 {
            return bad("ratio_lag must be 0 or 1".into());
        }
        if self.ardl_lag == 0 || self.causality_max_lag == 0 {
            return bad("lag settings must be positive".into());
        }
        for (name, a, b) in [
            ("relative", self.relative_from, self.relative_to),
            ("elasticity", self.elasticity_from, self.elasticity_to),
            ("recent", self.recent_from, self.recent_to),
        ] {
            if a > b {
                return bad(format!("{name} window is empty"));
            }
        }
        if self.baseline_country.is_empty() {
            return bad("baseline_country is empty".into());
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parsing it yields the same config.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let norm = match self.normalization {
            Normalization::LogScale => "log_scale",
            Normalization::PerCapita => "per_capita",
        };
        let pairs: [(&str, String); 20] = [
            ("alpha_unit_root", self.alpha_unit_root.to_string()),
            ("bounds_lo", self.bounds_lo.to_string()),
            ("bounds_hi", self.bounds_hi.to_string()),
            ("ardl_lag", self.ardl_lag.to_string()),
            ("causality_max_lag", self.causality_max_lag.to_string()),
            ("causality_threshold", self.causality_threshold.to_string()),
            ("ect_alpha", self.ect_alpha.to_string()),
            ("burn_in", self.burn_in.to_string()),
            ("baseline_country", self.baseline_country.clone()),
            ("ratio_lag", self.ratio_lag.to_string()),
            ("seed", self.seed.to_string()),
            ("normalization", norm.to_string()),
            ("diagnostics_alpha", self.diagnostics_alpha.to_string()),
            ("group_alpha", self.group_alpha.to_string()),
            ("relative_from", self.relative_from.to_string()),
            ("relative_to", self.relative_to.to_string()),
            ("elasticity_from", self.elasticity_from.to_string()),
            ("elasticity_to", self.elasticity_to.to_string()),
            ("recent_from", self.recent_from.to_string()),
            ("recent_to", self.recent_to.to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of the canonical rendering.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = StudyConfig::default();
        assert_eq!(StudyConfig::parse(&c.render()).unwrap(), c);
        assert_eq!(c.digest().len(), 64);
    }

    #[test]
    fn overrides_and_comments() {
        let c = StudyConfig::parse("# study\nratio_lag = 0\n\nbaseline_country = SE # sweden\nbounds_hi=5.0\n").unwrap();
        assert_eq!(c.ratio_lag, 0);
        assert_eq!(c.baseline_country, "SE");
        assert_eq!(c.bounds_hi, 5.0);
        assert_ne!(c.digest(), StudyConfig::default().digest());
    }

    #[test]
    fn unknown_key_rejected() {
        let e = StudyConfig::parse("alpha = 0.05\n").unwrap_err();
        assert!(matches!(e, PipelineError::Config { line: 1, .. }));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(StudyConfig::parse("ratio_lag = 2").is_err());
        assert!(StudyConfig::parse("bounds_lo = 5\nbounds_hi = 4").is_err());
        assert!(StudyConfig::parse("ect_alpha = 1.5").is_err());
        assert!(StudyConfig::parse("burn_in = -1").is_err());
        assert!(StudyConfig::parse("just text").is_err());
    }
}
