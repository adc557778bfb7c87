//! Ingestion, per-country orchestration, table assembly and emission.

mod config;
mod emit;
mod ingest;
mod names;
mod standardize;
mod study;
mod table;

pub use config::StudyConfig;
pub use emit::{emit, format_sig6, read_table_csv, CsvTable, Format, BUNDLE_FILE};
pub use ingest::{
    load_panel, splice_gdp, CountryData, CountryPanel, ASYLUM_FILE, GDP_FILE, POPULATION_FILE, REFERENCE_CODE,
};
pub use names::country_name;
pub use standardize::{standardize, standardize_country, StandardizedCountry};
pub use study::{model_options, run_country, run_study, CountryReport, GroupLabel, GroupLabels, Stage, StudyReport, Tables, UnitRootPair};
pub use table::{Cell, Table};

use std::path::PathBuf;

use thiserror::Error;

use crate::econ::EconError;
use crate::models::ModelError;
use crate::series::SeriesError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },
    #[error("{file}: duplicate row for {country} {year}")]
    DuplicateCountryYear { file: String, country: String, year: i32 },
    #[error("reference series: {0}")]
    MissingReference(String),
    #[error("{country}: GDP sources overlap in {got} years, need at least 3")]
    InsufficientOverlap { country: String, got: usize },
    #[error("no countries to process")]
    EmptyPanel,
    #[error("country {0} is not in the panel")]
    UnknownCountry(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl PipelineError {
    /// Whether the failure stems from the inputs rather than the program.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Self::MissingFile(_)
                | Self::Parse { .. }
                | Self::DuplicateCountryYear { .. }
                | Self::MissingReference(_)
                | Self::InsufficientOverlap { .. }
                | Self::EmptyPanel
                | Self::UnknownCountry(_)
                | Self::Config { .. }
        )
    }
}
