use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::study::StudyReport;
use super::table::{Cell, Table};
use super::PipelineError;

pub const BUNDLE_FILE: &str = "study.json";
const DIGEST_PREFIX: &str = "# config_digest: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown output format '{other}'")),
        }
    }
}

/// Formats `v` with six significant digits in the style of C's `%g`.
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => format_sig6(*v),
        Cell::Empty => String::new(),
    }
}

fn write_csv(path: &Path, table: &Table, digest: &str) -> Result<(), PipelineError> {
    let mut buf = format!("{DIGEST_PREFIX}{digest}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| PipelineError::Io(std::io::Error::other(e));
        w.write_record(&table.columns).map_err(io)?;
        for row in &table.rows {
            w.write_record(row.iter().map(cell_text)).map_err(io)?;
        }
        w.flush()?;
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Writes the tables and the JSON bundle into `out`. An empty `formats`
/// means every format. Returns the written paths.
pub fn emit(report: &StudyReport, out: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out)?;
    let wants = |f| formats.is_empty() || formats.contains(&f);
    let mut written = Vec::new();
    if wants(Format::Csv) {
        for (name, table) in report.tables.all() {
            let path = out.join(format!("{name}.csv"));
            write_csv(&path, table, &report.config_digest)?;
            written.push(path);
        }
    }
    if wants(Format::Json) {
        let path = out.join(BUNDLE_FILE);
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// A table read back from an emitted CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub digest: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table_csv(path: &Path) -> Result<CsvTable, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    let file = path.display().to_string();
    let parse = |line: u64, message: String| PipelineError::Parse { file: file.clone(), line, message };
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let digest = first
        .strip_prefix(DIGEST_PREFIX)
        .ok_or_else(|| parse(1, "missing config digest line".into()))?
        .trim()
        .to_string();
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let columns = r
        .headers()
        .map_err(|e| parse(2, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse(i as u64 + 3, e.to_string()))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(CsvTable { digest, columns, rows })
}
