//! Annual series container and the deterministic transforms built on it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series is empty")]
    Empty,
    #[error("non-finite value in {year}")]
    NonFinite { year: i32 },
    #[error("non-positive value in {year}")]
    NonPositiveValue { year: i32 },
    #[error("non-positive population in {year}")]
    NonPositivePopulation { year: i32 },
    #[error("non-positive reference value in {year}")]
    NonPositiveReference { year: i32 },
    #[error("series spans do not overlap")]
    EmptyOverlap,
    #[error("series too short: need {needed} values, have {got}")]
    SeriesTooShort { needed: usize, got: usize },
}

/// What the values of an [`AnnualSeries`] measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    RawCount,
    Population,
    PerCapita10k,
    PpsIndex,
    LogValue,
    Ratio,
}

/// Country-tagged run of consecutive yearly values; value `k` belongs to
/// `start_year + k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnualSeries<T> {
    country: String,
    start_year: i32,
    values: Vec<T>,
    unit: Unit,
}

impl<T: Scalar> AnnualSeries<T> {
    pub fn new(
        country: impl Into<String>,
        start_year: i32,
        values: Vec<T>,
        unit: Unit,
    ) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite {
                year: start_year + k as i32,
            });
        }
        Ok(Self {
            country: country.into(),
            start_year,
            values,
            unit,
        })
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    /// Last covered year (inclusive).
    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |k| self.start_year + k as i32)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.start_year + k as i32, v))
    }

    pub fn get(&self, year: i32) -> Option<T> {
        if year < self.start_year {
            return None;
        }
        self.values.get((year - self.start_year) as usize).copied()
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn with_country(mut self, country: impl Into<String>) -> Self {
        self.country = country.into();
        self
    }

    /// Element-wise map keeping span and country.
    pub fn map(&self, unit: Unit, f: impl Fn(T) -> T) -> Result<Self, SeriesError> {
        Self::new(
            self.country.clone(),
            self.start_year,
            self.values.iter().map(|&v| f(v)).collect(),
            unit,
        )
    }

    /// Sub-series over `[from, to]` (inclusive), clipped to the covered span.
    pub fn window(&self, from: i32, to: i32) -> Result<Self, SeriesError> {
        let lo = from.max(self.start_year);
        let hi = to.min(self.end_year());
        if lo > hi {
            return Err(SeriesError::EmptyOverlap);
        }
        let a = (lo - self.start_year) as usize;
        let b = (hi - self.start_year) as usize;
        Self::new(
            self.country.clone(),
            lo,
            self.values[a..=b].to_vec(),
            self.unit,
        )
    }

    /// Inclusive year range covered by both series.
    pub fn overlap(&self, other: &Self) -> Option<(i32, i32)> {
        let lo = self.start_year.max(other.start_year);
        let hi = self.end_year().min(other.end_year());
        (lo <= hi).then_some((lo, hi))
    }

    /// Pairs `(year, self_t, other_t)` on the common span.
    pub fn aligned(&self, other: &Self) -> Vec<(i32, T, T)> {
        match self.overlap(other) {
            Some((lo, hi)) => (lo..=hi)
                .map(|y| (y, self.get(y).unwrap(), other.get(y).unwrap()))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::of_usize(self.values.len())
    }

    /// Sample variance with `n - 1` denominator; zero for a single value.
    pub fn sample_variance(&self) -> T {
        sample_variance(&self.values)
    }
}

pub(crate) fn sample_variance<T: Scalar>(xs: &[T]) -> T {
    let n = xs.len();
    if n < 2 {
        return T::zero();
    }
    let m = xs.iter().copied().sum::<T>() / T::of_usize(n);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::of_usize(n - 1)
}

/// Element-wise natural log.
pub fn log_transform<T: Scalar>(s: &AnnualSeries<T>) -> Result<AnnualSeries<T>, SeriesError> {
    if let Some((year, _)) = s.iter().find(|&(_, v)| v <= T::zero()) {
        return Err(SeriesError::NonPositiveValue { year });
    }
    s.map(Unit::LogValue, |v| v.ln())
}

/// Applications per 10,000 inhabitants on the common span.
pub fn per_capita_10k<T: Scalar>(
    counts: &AnnualSeries<T>,
    population: &AnnualSeries<T>,
) -> Result<AnnualSeries<T>, SeriesError> {
    let pairs = counts.aligned(population);
    if pairs.is_empty() {
        return Err(SeriesError::EmptyOverlap);
    }
    let ten_k = T::lit(10_000.0);
    let mut out = Vec::with_capacity(pairs.len());
    for &(year, c, p) in &pairs {
        if p <= T::zero() {
            return Err(SeriesError::NonPositivePopulation { year });
        }
        out.push(ten_k * c / p);
    }
    AnnualSeries::new(counts.country(), pairs[0].0, out, Unit::PerCapita10k)
}

/// `100 * s_t / reference_t` on the common span.
pub fn index_to_eu27<T: Scalar>(
    s: &AnnualSeries<T>,
    eu27_avg: &AnnualSeries<T>,
) -> Result<AnnualSeries<T>, SeriesError> {
    let pairs = s.aligned(eu27_avg);
    if pairs.is_empty() {
        return Err(SeriesError::EmptyOverlap);
    }
    let hundred = T::lit(100.0);
    let mut out = Vec::with_capacity(pairs.len());
    for &(year, v, r) in &pairs {
        if r <= T::zero() {
            return Err(SeriesError::NonPositiveReference { year });
        }
        out.push(hundred * (v / r));
    }
    AnnualSeries::new(s.country(), pairs[0].0, out, Unit::PpsIndex)
}

/// Shifts the series `k` years forward: the lagged value at year `t` is `s_{t-k}`.
pub fn lag<T: Scalar>(s: &AnnualSeries<T>, k: usize) -> Result<AnnualSeries<T>, SeriesError> {
    if s.len() <= k {
        return Err(SeriesError::SeriesTooShort {
            needed: k + 1,
            got: s.len(),
        });
    }
    Ok(AnnualSeries {
        start_year: s.start_year + k as i32,
        ..s.clone()
    })
}

/// First difference; the result starts one year later.
pub fn diff<T: Scalar>(s: &AnnualSeries<T>) -> Result<AnnualSeries<T>, SeriesError> {
    if s.len() < 2 {
        return Err(SeriesError::SeriesTooShort {
            needed: 2,
            got: s.len(),
        });
    }
    let values = s.values.windows(2).map(|w| w[1] - w[0]).collect();
    AnnualSeries::new(s.country(), s.start_year + 1, values, s.unit)
}

/// Replaces zeros with half the smallest positive value; reports whether
/// anything was floored.
pub fn floor_zeros<T: Scalar>(s: &AnnualSeries<T>) -> Result<(AnnualSeries<T>, bool), SeriesError> {
    if let Some((year, _)) = s.iter().find(|&(_, v)| v < T::zero()) {
        return Err(SeriesError::NonPositiveValue { year });
    }
    let min_pos = s
        .values
        .iter()
        .copied()
        .filter(|&v| v > T::zero())
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))));
    let Some(min_pos) = min_pos else {
        return Err(SeriesError::NonPositiveValue {
            year: s.start_year,
        });
    };
    let floor = min_pos * T::lit(0.5);
    let floored = s.values.iter().any(|&v| v == T::zero());
    let out = s.map(s.unit, |v| if v == T::zero() { floor } else { v })?;
    Ok((out, floored))
}

/// Standardizes to mean 0 / standard deviation 1 (used for plotting output only).
pub fn zscore<T: Scalar>(s: &AnnualSeries<T>) -> Result<AnnualSeries<T>, SeriesError> {
    let m = s.mean();
    let sd = s.sample_variance().sqrt();
    if sd == T::zero() {
        return s.map(s.unit, |_| T::zero());
    }
    s.map(s.unit, |v| (v - m) / sd)
}
