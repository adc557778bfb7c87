use std::collections::BTreeMap;

use serde::Serialize;

use super::ingest::{CountryData, CountryPanel};
use crate::series::{floor_zeros, index_to_eu27, per_capita_10k, SeriesError};
use crate::Series;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StandardizedCountry {
    /// Applications per 10,000 inhabitants, zeros floored.
    pub asylum_pc: Series,
    /// Asylum per head indexed to the reference (reference = 100).
    pub asylum_index: Series,
    /// GDP per head in PPS indexed to the reference.
    pub gdp_index: Series,
    pub zero_floored: bool,
}

pub fn standardize_country(data: &CountryData, reference: &CountryData) -> Result<StandardizedCountry, SeriesError> {
    let (asylum_pc, zero_floored) = floor_zeros(&per_capita_10k(&data.asylum, &data.population)?)?;
    let ref_pc = per_capita_10k(&reference.asylum, &reference.population)?;
    Ok(StandardizedCountry {
        asylum_index: index_to_eu27(&asylum_pc, &ref_pc)?,
        gdp_index: index_to_eu27(&data.gdp_pps, &reference.gdp_pps)?,
        asylum_pc,
        zero_floored,
    })
}

/// Per-capita and reference-indexed series for every country in the panel.
pub fn standardize(panel: &CountryPanel) -> Result<BTreeMap<String, StandardizedCountry>, SeriesError> {
    panel
        .countries
        .iter()
        .map(|(c, d)| Ok((c.clone(), standardize_country(d, &panel.reference)?)))
        .collect()
}
