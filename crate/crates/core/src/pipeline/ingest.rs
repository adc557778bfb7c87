use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::econ::ols;
use crate::series::{AnnualSeries, Unit};
use crate::Series;

/// Country code of the aggregate rows used as the indexing reference.
pub const REFERENCE_CODE: &str = "EU27";
pub const ASYLUM_FILE: &str = "asylum.csv";
pub const POPULATION_FILE: &str = "population.csv";
pub const GDP_FILE: &str = "gdp_pps.csv";
const MIN_SPLICE_OVERLAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryData {
    pub asylum: Series,
    pub population: Series,
    pub gdp_pps: Series,
    /// Years whose population was interpolated.
    pub population_interpolated: Vec<i32>,
    /// GDP sources in splice order (oldest first).
    pub gdp_sources: Vec<String>,
}

impl CountryData {
    pub fn span(&self) -> (i32, i32) {
        (self.asylum.start_year(), self.asylum.end_year())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryPanel {
    pub countries: BTreeMap<String, CountryData>,
    pub reference: CountryData,
    /// Countries present in the inputs but left out, with the reason.
    pub excluded: BTreeMap<String, String>,
    /// SHA-256 of each input file.
    pub provenance: BTreeMap<String, String>,
}

impl CountryPanel {
    /// Keeps only the listed countries.
    pub fn restrict(&mut self, codes: &BTreeSet<String>) -> Result<(), PipelineError> {
        if let Some(c) = codes.iter().find(|c| !self.countries.contains_key(*c)) {
            return Err(PipelineError::UnknownCountry(c.clone()));
        }
        self.countries.retain(|c, _| codes.contains(c));
        Ok(())
    }
}

struct Row {
    country: String,
    year: i32,
    value: f64,
    source: String,
}

fn parse_err(file: &str, line: u64, message: impl Into<String>) -> PipelineError {
    PipelineError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Reads `country,year,<value>[,source]`; `#` lines are comments.
fn read_rows(
    dir: &Path,
    file: &str,
    value_col: &str,
    valid: fn(f64) -> bool,
    provenance: &mut BTreeMap<String, String>,
) -> Result<Vec<Row>, PipelineError> {
    let path: PathBuf = dir.join(file);
    let bytes = fs::read(&path).map_err(|_| PipelineError::MissingFile(path.clone()))?;
    provenance.insert(file.to_string(), hex::encode(Sha256::digest(&bytes)));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(bytes.as_slice());
    let header = rdr.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let with_source = match cols.as_slice() {
        ["country", "year", v] if *v == value_col => false,
        ["country", "year", v, "source"] if *v == value_col => true,
        _ => {
            return Err(parse_err(
                file,
                1,
                format!("expected header country,year,{value_col}[,source], got {}", cols.join(",")),
            ))
        }
    };
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(file, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let country = rec[0].to_string();
        if country.is_empty() {
            return Err(parse_err(file, line, "empty country code"));
        }
        let year: i32 = rec[1]
            .parse()
            .map_err(|_| parse_err(file, line, format!("bad year {:?}", &rec[1])))?;
        let value: f64 = rec[2]
            .parse()
            .map_err(|_| parse_err(file, line, format!("bad value {:?}", &rec[2])))?;
        if !value.is_finite() || !valid(value) {
            return Err(parse_err(file, line, format!("value {value} out of range")));
        }
        let source = if with_source { rec[3].to_string() } else { String::new() };
        if !seen.insert((country.clone(), year, source.clone())) {
            return Err(PipelineError::DuplicateCountryYear {
                file: file.to_string(),
                country,
                year,
            });
        }
        rows.push(Row {
            country,
            year,
            value,
            source,
        });
    }
    Ok(rows)
}

type YearMap = BTreeMap<i32, f64>;

fn group(rows: &[Row]) -> BTreeMap<String, BTreeMap<String, YearMap>> {
    let mut out: BTreeMap<String, BTreeMap<String, YearMap>> = BTreeMap::new();
    for r in rows {
        out.entry(r.country.clone())
            .or_default()
            .entry(r.source.clone())
            .or_default()
            .insert(r.year, r.value);
    }
    out
}

/// First contiguous run of a year map as a series; `None` if it has gaps.
fn contiguous(country: &str, m: &YearMap, unit: Unit) -> Option<Series> {
    let (&lo, _) = m.first_key_value()?;
    let (&hi, _) = m.last_key_value()?;
    if (hi - lo + 1) as usize != m.len() {
        return None;
    }
    AnnualSeries::new(country, lo, m.values().copied().collect(), unit).ok()
}

/// Extends `old` past its last year with `new` mapped through the least-squares
/// line of `old` on `new` over their common years.
pub fn splice_gdp(old: &Series, new: &Series) -> Result<Series, PipelineError> {
    let overlap = old.aligned(new).len();
    if overlap < MIN_SPLICE_OVERLAP {
        return Err(PipelineError::InsufficientOverlap {
            country: old.country().to_string(),
            got: overlap,
        });
    }
    let fit = ols(old, &[("new", new)], true)?;
    let (a, b) = (fit.coefficient("const").unwrap(), fit.coefficient("new").unwrap());
    let mut values = old.values().to_vec();
    for year in (old.end_year() + 1)..=new.end_year() {
        values.push(a + b * new.get(year).unwrap());
    }
    Ok(AnnualSeries::new(old.country(), old.start_year(), values, old.unit())?)
}

/// GDP per country from one or more sources, spliced oldest first.
fn gdp_series(country: &str, sources: &BTreeMap<String, YearMap>) -> Result<(Series, Vec<String>), String> {
    let mut parts = Vec::new();
    for (name, m) in sources {
        let s = contiguous(country, m, Unit::PpsIndex).ok_or_else(|| format!("gap in GDP source {name:?}"))?;
        parts.push((name.clone(), s));
    }
    parts.sort_by(|a, b| a.1.start_year().cmp(&b.1.start_year()).then(a.0.cmp(&b.0)));
    let mut iter = parts.into_iter();
    let (first_name, mut acc) = iter.next().ok_or("no GDP rows")?;
    let mut names = vec![first_name];
    for (name, s) in iter {
        if s.end_year() <= acc.end_year() {
            names.push(name);
            continue;
        }
        acc = splice_gdp(&acc, &s).map_err(|e| e.to_string())?;
        names.push(name);
    }
    Ok((acc, names))
}

/// Linear interpolation of interior gaps.
fn interpolate(country: &str, m: &YearMap, lo: i32, hi: i32) -> (Series, Vec<i32>) {
    let mut values = Vec::new();
    let mut filled = Vec::new();
    for year in lo..=hi {
        match m.get(&year) {
            Some(&v) => values.push(v),
            None => {
                let (&y0, &v0) = m.range(..year).next_back().unwrap();
                let (&y1, &v1) = m.range(year..).next().unwrap();
                let w = (year - y0) as f64 / (y1 - y0) as f64;
                values.push(v0 + w * (v1 - v0));
                filled.push(year);
            }
        }
    }
    let s = AnnualSeries::new(country, lo, values, Unit::Population).expect("finite interpolation");
    (s, filled)
}

fn only_source<'a>(
    file: &str,
    country: &str,
    m: &'a BTreeMap<String, YearMap>,
) -> Result<&'a YearMap, PipelineError> {
    m.values().next().ok_or_else(|| PipelineError::Parse {
        file: file.to_string(),
        line: 0,
        message: format!("no rows for {country}"),
    })
}

fn reference(
    asylum: &BTreeMap<String, BTreeMap<String, YearMap>>,
    pop: &BTreeMap<String, BTreeMap<String, YearMap>>,
    gdp: &BTreeMap<String, BTreeMap<String, YearMap>>,
) -> Result<CountryData, PipelineError> {
    let missing = |f: &str| PipelineError::MissingReference(format!("{REFERENCE_CODE} rows missing from {f}"));
    let a = asylum.get(REFERENCE_CODE).ok_or_else(|| missing(ASYLUM_FILE))?;
    let p = pop.get(REFERENCE_CODE).ok_or_else(|| missing(POPULATION_FILE))?;
    let g = gdp.get(REFERENCE_CODE).ok_or_else(|| missing(GDP_FILE))?;
    let a = only_source(ASYLUM_FILE, REFERENCE_CODE, a)?;
    let asylum = contiguous(REFERENCE_CODE, a, Unit::RawCount)
        .ok_or_else(|| PipelineError::MissingReference(format!("{REFERENCE_CODE} asylum series has gaps")))?;
    let p = only_source(POPULATION_FILE, REFERENCE_CODE, p)?;
    let (lo, hi) = (*p.keys().next().unwrap(), *p.keys().next_back().unwrap());
    let (population, population_interpolated) = interpolate(REFERENCE_CODE, p, lo, hi);
    let (gdp_pps, gdp_sources) = gdp_series(REFERENCE_CODE, g).map_err(|e| PipelineError::MissingReference(format!("{REFERENCE_CODE}: {e}")))?;
    Ok(CountryData {
        asylum,
        population,
        gdp_pps,
        population_interpolated,
        gdp_sources,
    })
}

fn align_country(
    code: &str,
    asylum: &BTreeMap<String, YearMap>,
    pop: &BTreeMap<String, YearMap>,
    gdp: &BTreeMap<String, YearMap>,
    reference: &CountryData,
) -> Result<CountryData, String> {
    let a = asylum.values().next().ok_or("no asylum rows")?;
    let p = pop.values().next().ok_or("no population rows")?;
    let (g, gdp_sources) = gdp_series(code, gdp)?;
    let gm: YearMap = g.iter().collect();
    let ref_ok = |y: i32| {
        reference.asylum.get(y).is_some() && reference.population.get(y).is_some() && reference.gdp_pps.get(y).is_some()
    };
    let present = |y: i32| a.contains_key(&y) && p.contains_key(&y) && gm.contains_key(&y) && ref_ok(y);
    let years: BTreeSet<i32> = a.keys().chain(p.keys()).chain(gm.keys()).copied().collect();
    let lo = years.iter().copied().find(|&y| present(y)).ok_or("no year with all series present")?;
    let hi = years.iter().rev().copied().find(|&y| present(y)).unwrap();
    if let Some(y) = (lo..=hi).find(|y| !a.contains_key(y)) {
        return Err(format!("asylum gap in {y}"));
    }
    if let Some(y) = (lo..=hi).find(|&y| !ref_ok(y)) {
        return Err(format!("reference gap in {y}"));
    }
    let asylum_s = AnnualSeries::new(code, lo, (lo..=hi).map(|y| a[&y]).collect(), Unit::RawCount).map_err(|e| e.to_string())?;
    let gdp_s = g.window(lo, hi).map_err(|e| e.to_string())?;
    let (population, population_interpolated) = interpolate(code, p, lo, hi);
    Ok(CountryData {
        asylum: asylum_s,
        population,
        gdp_pps: gdp_s,
        population_interpolated,
        gdp_sources,
    })
}

/// Reads the three input files from `data_dir` and aligns every country.
pub fn load_panel(data_dir: &Path) -> Result<CountryPanel, PipelineError> {
    let mut provenance = BTreeMap::new();
    let asylum = group(&read_rows(data_dir, ASYLUM_FILE, "applications", |v| v >= 0.0, &mut provenance)?);
    let pop = group(&read_rows(data_dir, POPULATION_FILE, "population", |v| v > 0.0, &mut provenance)?);
    let gdp = group(&read_rows(data_dir, GDP_FILE, "gdp_per_capita_pps", |v| v > 0.0, &mut provenance)?);
    let reference = reference(&asylum, &pop, &gdp)?;

    let codes: BTreeSet<&String> = asylum
        .keys()
        .chain(pop.keys())
        .chain(gdp.keys())
        .filter(|c| c.as_str() != REFERENCE_CODE)
        .collect();
    let empty = BTreeMap::new();
    let mut countries = BTreeMap::new();
    let mut excluded = BTreeMap::new();
    for code in codes {
        let get = |m: &'_ BTreeMap<String, BTreeMap<String, YearMap>>| m.get(code).unwrap_or(&empty).clone();
        match align_country(code, &get(&asylum), &get(&pop), &get(&gdp), &reference) {
            Ok(d) => {
                countries.insert(code.clone(), d);
            }
            Err(reason) => {
                excluded.insert(code.clone(), reason);
            }
        }
    }
    Ok(CountryPanel {
        countries,
        reference,
        excluded,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, asylum: &str, pop: &str, gdp: &str) {
        fs::write(dir.join(ASYLUM_FILE), asylum).unwrap();
        fs::write(dir.join(POPULATION_FILE), pop).unwrap();
        fs::write(dir.join(GDP_FILE), gdp).unwrap();
    }

    const REF_A: &str = "EU27,2000,1000\nEU27,2001,1100\nEU27,2002,1200\nEU27,2003,1300\n";
    const REF_P: &str = "EU27,2000,100000\nEU27,2001,100000\nEU27,2002,100000\nEU27,2003,100000\n";
    const REF_G: &str = "EU27,2000,20000\nEU27,2001,21000\nEU27,2002,22000\nEU27,2003,23000\n";

    #[test]
    fn minimal_panel() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            &format!("country,year,applications\n{REF_A}XX,2000,5\nXX,2001,6\nXX,2002,7\n"),
            &format!("country,year,population\n{REF_P}XX,1999,900\nXX,2000,1000\nXX,2001,1000\nXX,2002,1000\n"),
            &format!("country,year,gdp_per_capita_pps\n{REF_G}XX,2000,100\nXX,2001,110\nXX,2002,120\nXX,2003,130\n"),
        );
        let p = load_panel(d.path()).unwrap();
        assert_eq!(p.countries.len(), 1);
        assert_eq!(p.countries["XX"].span(), (2000, 2002));
        assert_eq!(p.countries["XX"].population.start_year(), 2000);
        assert_eq!(p.provenance.len(), 3);
    }

    #[test]
    fn asylum_gap_excludes_country_and_population_gap_is_filled() {
        let d = tempfile::tempdir().unwrap();
        write(
            d.path(),
            &format!("country,year,applications\n{REF_A}XX,2000,5\nXX,2002,7\nXX,2003,7\nYY,2000,1\nYY,2001,2\nYY,2002,3\n"),
            &format!("country,year,population\n{REF_P}XX,2000,1000\nXX,2001,1000\nXX,2002,1000\nXX,2003,1000\nYY,2000,500\nYY,2002,700\n"),
            &format!("country,year,gdp_per_capita_pps\n{REF_G}XX,2000,100\nXX,2001,110\nXX,2002,120\nXX,2003,130\nYY,2000,1\nYY,2001,2\nYY,2002,3\n"),
        );
        let p = load_panel(d.path()).unwrap();
        assert!(p.excluded["XX"].contains("2001"));
        assert_eq!(p.countries["YY"].population.values(), &[500.0, 600.0, 700.0]);
        assert_eq!(p.countries["YY"].population_interpolated, vec![2001]);
    }

    #[test]
    fn errors() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(load_panel(d.path()), Err(PipelineError::MissingFile(_))));
        write(
            d.path(),
            &format!("country,year,applications\n{REF_A}XX,2000,5\nXX,2000,6\n"),
            &format!("country,year,population\n{REF_P}"),
            &format!("country,year,gdp_per_capita_pps\n{REF_G}"),
        );
        assert!(matches!(load_panel(d.path()), Err(PipelineError::DuplicateCountryYear { year: 2000, .. })));
        write(
            d.path(),
            &format!("country,year,applications\n{REF_A}XX,20x0,5\n"),
            &format!("country,year,population\n{REF_P}"),
            &format!("country,year,gdp_per_capita_pps\n{REF_G}"),
        );
        match load_panel(d.path()) {
            Err(PipelineError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        write(
            d.path(),
            "country,year,count\n",
            &format!("country,year,population\n{REF_P}"),
            &format!("country,year,gdp_per_capita_pps\n{REF_G}"),
        );
        assert!(matches!(load_panel(d.path()), Err(PipelineError::Parse { line: 1, .. })));
    }

    fn s(start: i32, v: Vec<f64>) -> Series {
        AnnualSeries::new("T", start, v, Unit::PpsIndex).unwrap()
    }

    #[test]
    fn splice_identity_and_scaled() {
        let old = s(2000, vec![10.0, 11.0, 12.5, 13.0, 14.2]);
        let new = s(2002, vec![12.5, 13.0, 14.2, 15.1, 16.0]);
        let out = splice_gdp(&old, &new).unwrap();
        assert_eq!(out.end_year(), 2006);
        assert!((out.get(2005).unwrap() - 15.1).abs() < 1e-10);

        let new2 = new.map(Unit::PpsIndex, |v| 2.0 * v).unwrap();
        let out = splice_gdp(&old, &new2).unwrap();
        assert!((out.get(2006).unwrap() - new2.get(2006).unwrap() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn splice_needs_three_years() {
        let old = s(2000, vec![10.0, 11.0, 12.0]);
        let new = s(2001, vec![11.0, 12.0]);
        assert!(matches!(splice_gdp(&old, &new), Err(PipelineError::InsufficientOverlap { got: 2, .. })));
    }
}
