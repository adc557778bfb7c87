use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tsecon::models::{fit_elasticity_model_with, fit_loglog, fit_ratio_model, CoefficientDynamics};
use tsecon::pipeline::{
    emit, load_panel, run_study, standardize_country, Format, PipelineError, StudyConfig,
};
use tsecon::selftest;

#[derive(Parser)]
#[command(name = "tsecon", version, about = "Asylum and GDP panel study: models, tests and tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full study and write the tables.
    Run {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Restrict the run to these countries; the baseline is always kept.
        #[arg(long = "country")]
        countries: Vec<String>,
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "csv,json")]
        formats: Vec<Format>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the Monte-Carlo checks of the statistical routines.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit one model for one country and print it as JSON.
    Fit {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        country: String,
        #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/data/eea29"))]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Ratio,
    Elasticity,
    Loglog,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<StudyConfig, PipelineError> {
    match path {
        None => Ok(StudyConfig::default()),
        Some(p) if !p.exists() => Err(PipelineError::MissingFile(p.to_path_buf())),
        Some(p) => StudyConfig::parse(&fs::read_to_string(p)?),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { data, out, config, countries, baseline, formats, seed } => {
            let mut config = read_config(config.as_deref())?;
            if let Some(b) = baseline {
                config.baseline_country = b;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            config.validate()?;
            let mut panel = load_panel(&data)?;
            if !countries.is_empty() {
                let mut keep: BTreeSet<String> = countries.into_iter().collect();
                keep.insert(config.baseline_country.clone());
                panel.restrict(&keep)?;
            }
            let report = run_study(&panel, &config)?;
            let written = emit(&report, &out, &formats)?;
            eprintln!(
                "{} countries, {} excluded, {} files written to {} in {:.2?}",
                report.countries.len(),
                report.excluded.len(),
                written.len(),
                out.display(),
                report.elapsed
            );
            Ok(())
        }
        Command::Selftest { seed } => {
            let checks = selftest::run_all(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Internal(format!("{failed} of {} checks failed", checks.len())))
            }
        }
        Command::Fit { model, country, data, config } => {
            let config = read_config(config.as_deref())?;
            let panel = load_panel(&data)?;
            let cd = panel
                .countries
                .get(&country)
                .ok_or_else(|| PipelineError::UnknownCountry(country.clone()))?;
            let s = standardize_country(cd, &panel.reference).map_err(PipelineError::from)?;
            let opts = tsecon::pipeline::model_options(&config);
            let model_err = |e: tsecon::models::ModelError| Failure::Internal(format!("{country}: {e}"));
            let json = match model {
                ModelKind::Ratio => {
                    serde_json::to_string_pretty(&fit_ratio_model(&s.asylum_index, &s.gdp_index, &opts).map_err(model_err)?)
                }
                ModelKind::Loglog => serde_json::to_string_pretty(&fit_loglog(&s.asylum_index, &s.gdp_index).map_err(model_err)?),
                ModelKind::Elasticity => serde_json::to_string_pretty(
                    &fit_elasticity_model_with(&s.asylum_index, &s.gdp_index, CoefficientDynamics::Auto, &opts)
                        .map_err(model_err)?,
                ),
            }
            .map_err(|e| Failure::Internal(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(2)
        }
    }
}
