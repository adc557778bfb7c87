use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::Serialize;

use super::ModelError;
use crate::Series;

/// Country-by-year grid; missing cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearTable {
    pub years: Vec<i32>,
    pub rows: BTreeMap<String, Vec<Option<f64>>>,
}

impl YearTable {
    pub fn from_series<'a>(series: impl IntoIterator<Item = (&'a str, &'a Series)>, years: RangeInclusive<i32>) -> Self {
        let years: Vec<i32> = years.collect();
        let rows = series
            .into_iter()
            .map(|(c, s)| (c.to_string(), years.iter().map(|&y| s.get(y)).collect()))
            .collect();
        Self { years, rows }
    }

    /// Each row divided year-wise by the baseline row.
    pub fn relative_to(&self, baseline: &str) -> Result<Self, ModelError> {
        let base = self
            .rows
            .get(baseline)
            .ok_or_else(|| ModelError::MissingBaseline(baseline.to_string()))?;
        let rows = self
            .rows
            .iter()
            .map(|(c, row)| {
                let rel = row
                    .iter()
                    .zip(base)
                    .map(|(v, b)| match (v, b) {
                        (Some(v), Some(b)) if *b != 0.0 => Some(v / b),
                        _ => None,
                    })
                    .collect();
                (c.clone(), rel)
            })
            .collect();
        Ok(Self {
            years: self.years.clone(),
            rows,
        })
    }

    /// Mean of the present cells of a row.
    pub fn row_mean(&self, country: &str) -> Option<f64> {
        let vals: Vec<f64> = self.rows.get(country)?.iter().flatten().copied().collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Years above `1` and years present, for a relative row.
    pub fn count_above_one(&self, country: &str) -> Option<(u64, u64)> {
        let row = self.rows.get(country)?;
        let present = row.iter().flatten().count() as u64;
        let above = row.iter().flatten().filter(|&&v| v > 1.0).count() as u64;
        Some((above, present))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{AnnualSeries, Unit};

    #[test]
    fn baseline_row_is_all_ones() {
        let a = AnnualSeries::new("A", 2000, vec![0.3, 1.7, 2.9], Unit::Ratio).unwrap();
        let b = AnnualSeries::new("B", 1999, vec![1.0, 2.0, 3.0, 4.0], Unit::Ratio).unwrap();
        let t = YearTable::from_series([("A", &a), ("B", &b)], 1999..=2002);
        let r = t.relative_to("A").unwrap();
        assert_eq!(r.rows["A"], vec![None, Some(1.0), Some(1.0), Some(1.0)]);
        assert_eq!(r.rows["B"][1], Some(2.0 / 0.3));
        assert_eq!(r.count_above_one("B"), Some((3, 3)));
        assert!(matches!(t.relative_to("Z"), Err(ModelError::MissingBaseline(_))));
    }
}
