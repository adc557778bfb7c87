//! Monte-Carlo suites behind the `selftest` command.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::econ::{adf_test, arch_lm_test, dfgls_test, granger_ecm, CausalDirection, Decision};
use crate::models::fit_elasticity_model;
use crate::series::{AnnualSeries, Unit};
use crate::synth::{generate_synthetic, OmegaPath, Process, SeedSpec, SYNTHETIC_START_YEAR};
use crate::Series;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

fn draw(seed: u64, process: Process, n: usize) -> Series {
    generate_synthetic::<f64>(&SeedSpec { seed, process, length: n, scale: 1.0 }).single()
}

/// `e_t = z_t * sqrt(1 + 0.8 e_{t-1}^2)`.
pub fn arch_series(seed: u64, n: usize) -> Series {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev: f64 = 0.0;
    let e = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            prev = z * (1.0 + 0.8 * prev * prev).sqrt();
            prev
        })
        .collect();
    AnnualSeries::new("SYN", SYNTHETIC_START_YEAR, e, Unit::Ratio).expect("finite draws")
}

/// Levels pair from the log-log generator: (asylum, gdp).
pub fn tvp_levels(seed: u64, omega: OmegaPath, n: usize, sigma_eps: f64) -> (Series, Series) {
    let (x, y) = generate_synthetic::<f64>(&SeedSpec {
        seed,
        process: Process::TvpLogLog { mu: 0.2, omega, sigma_eps },
        length: n,
        scale: 0.1,
    })
    .pair();
    (
        y.map(Unit::PerCapita10k, f64::exp).expect("finite"),
        x.map(Unit::PpsIndex, f64::exp).expect("finite"),
    )
}

fn count(seeds: std::ops::Range<u64>, f: impl Fn(u64) -> bool + Sync) -> usize {
    seeds.into_par_iter().filter(|&s| f(s)).count()
}

fn stationary(v: Result<crate::econ::IntegrationVerdict, crate::econ::EconError>) -> bool {
    matches!(v, Ok(v) if v.order == 0)
}

pub fn unit_root_checks(seed: u64) -> Vec<Check> {
    let base = seed.wrapping_mul(1_000_003);
    let size = count(0..500, |s| stationary(adf_test(&draw(base + s, Process::RandomWalk, 100), 0.05)));
    let power = count(0..500, |s| stationary(adf_test(&draw(base + s, Process::Ar1 { phi: 0.5 }, 200), 0.05)));
    let near = |s| draw(base + s, Process::Ar1 { phi: 0.9 }, 50);
    let adf = count(0..500, |s| stationary(adf_test(&near(s), 0.05)));
    let gls = count(0..500, |s| stationary(dfgls_test(&near(s), 0.05)));
    let rate = size as f64 / 500.0;
    vec![
        Check::new("adf_size", (0.02..=0.09).contains(&rate), format!("{size}/500 random walks rejected")),
        Check::new("adf_power", power >= 450, format!("{power}/500 AR(0.5) series rejected")),
        Check::new("dfgls_beats_adf", gls > adf, format!("AR(0.9): DF-GLS {gls}/500, ADF {adf}/500")),
    ]
}

pub fn arch_checks(seed: u64) -> Vec<Check> {
    let base = seed.wrapping_mul(1_000_003);
    let accepts = |s: &Series| matches!(arch_lm_test(s, 1, 0.05), Ok(o) if o.decision == Decision::Accept);
    let false_pos = count(0..200, |s| accepts(&draw(base + s, Process::WhiteNoise, 200)));
    let detected = count(0..200, |s| accepts(&arch_series(base + s, 200)));
    vec![
        Check::new("arch_size", false_pos <= 18, format!("{false_pos}/200 iid series flagged")),
        Check::new("arch_power", detected >= 160, format!("{detected}/200 ARCH series flagged")),
    ]
}

pub fn elasticity_checks(seed: u64) -> Vec<Check> {
    let n = 200;
    let (a, g) = tvp_levels(seed, OmegaPath::Constant(0.8), n, 0.05);
    let constant = match fit_elasticity_model(&a, &g) {
        Ok(f) => {
            let worst = f.omega_path.values().iter().map(|w| (w - 0.8).abs()).fold(0.0, f64::max);
            Check::new("elasticity_constant", worst <= 0.05, format!("max |omega - 0.8| = {worst:.4}"))
        }
        Err(e) => Check::new("elasticity_constant", false, e.to_string()),
    };
    let path = OmegaPath::Linear { start: 0.5, end: 1.0 };
    let rmses: Vec<Result<f64, String>> = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let (a, g) = tvp_levels(seed.wrapping_mul(1_000_003) + s, path.clone(), n, 0.05);
            let f = fit_elasticity_model(&a, &g).map_err(|e| e.to_string())?;
            let sse: f64 = f
                .omega_path
                .iter()
                .map(|(y, w)| (w - path.at((y - SYNTHETIC_START_YEAR) as usize, n)).powi(2))
                .sum();
            Ok((sse / f.omega_path.len() as f64).sqrt())
        })
        .collect();
    let drifting = match rmses.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(r) => {
            let worst = r.iter().copied().fold(0.0, f64::max);
            Check::new("elasticity_drift", worst < 0.1, format!("worst RMSE over 20 seeds = {worst:.4}"))
        }
        Err(e) => Check::new("elasticity_drift", false, e),
    };
    vec![constant, drifting]
}

pub fn causality_checks(seed: u64) -> Vec<Check> {
    let base = seed.wrapping_mul(1_000_003);
    let none = count(0..100, |s| {
        let a = draw(base + 2 * s, Process::WhiteNoise, 200);
        let b = draw(base + 2 * s + 1, Process::WhiteNoise, 200);
        matches!(granger_ecm(&a, &b, false, 0.95), Ok(r) if r.direction == CausalDirection::None)
    });
    vec![Check::new("causality_null", none >= 90, format!("{none}/100 independent pairs show no direction"))]
}

/// Every Monte-Carlo suite, seeded from `seed`.
pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = unit_root_checks(seed);
    out.extend(arch_checks(seed));
    out.extend(elasticity_checks(seed));
    out.extend(causality_checks(seed));
    out
}
