use std::collections::BTreeMap;
use std::fmt::Display;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::ingest::CountryPanel;
use super::names::country_name;
use super::standardize::{standardize_country, StandardizedCountry};
use super::table::{Cell, Table};
use super::{PipelineError, StudyConfig};
use crate::econ::{
    adf_test, ardl_bounds_test, binomial_group_test, dfgls_test, granger_causality, BinomialGroup, CausalDirection,
    CausalityResult, Decision, GrangerForm, IntegrationVerdict, TestOutcome,
};
use crate::models::{
    elasticity_year_table, fit_elasticity_model_with, fit_loglog, fit_ratio_model, CoefficientDynamics,
    ElasticityFit, LogLogFit, ModelOptions, RatioFit, YearTable, MIN_SPAN,
};
use crate::series::log_transform;
use crate::Series;

/// Outcome of one pipeline stage for one country.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Stage<T> {
    Done(T),
    NotApplicable(String),
    Failed(String),
}

impl<T> Stage<T> {
    fn from_result<E: Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Stage::Done(v),
            Err(e) => Stage::Failed(e.to_string()),
        }
    }

    pub fn done(&self) -> Option<&T> {
        match self {
            Stage::Done(v) => Some(v),
            _ => None,
        }
    }

    fn cell_status(&self) -> Cell {
        match self {
            Stage::Done(_) => Cell::Empty,
            Stage::NotApplicable(_) => Cell::text("N/A"),
            Stage::Failed(_) => Cell::text("failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRootPair {
    pub asylum: IntegrationVerdict,
    pub gdp: IntegrationVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLabel {
    Baseline,
    Higher,
    Similar,
    Lower,
    NoData,
}

impl From<BinomialGroup> for GroupLabel {
    fn from(g: BinomialGroup) -> Self {
        match g {
            BinomialGroup::Higher => GroupLabel::Higher,
            BinomialGroup::Similar => GroupLabel::Similar,
            BinomialGroup::Lower => GroupLabel::Lower,
        }
    }
}

impl GroupLabel {
    fn as_str(self) -> &'static str {
        match self {
            GroupLabel::Baseline => "baseline",
            GroupLabel::Higher => "higher",
            GroupLabel::Similar => "similar",
            GroupLabel::Lower => "lower",
            GroupLabel::NoData => "N/A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupLabels {
    pub per_capita: GroupLabel,
    pub ratio: GroupLabel,
    pub elasticity: GroupLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryReport {
    pub country: String,
    pub span: (i32, i32),
    pub n_years: usize,
    pub zero_floored: bool,
    pub population_interpolated: Vec<i32>,
    pub gdp_sources: Vec<String>,
    pub series: StandardizedCountry,
    pub ratio: Stage<RatioFit>,
    pub loglog: Stage<LogLogFit>,
    pub adf: Stage<UnitRootPair>,
    pub dfgls: Stage<UnitRootPair>,
    pub bounds: Stage<TestOutcome>,
    pub causality: Stage<CausalityResult>,
    /// Whether the error-correction term is significant at the configured level.
    pub ect_significant: Option<bool>,
    /// Bounds and causality results paired with the DF-GLS orders.
    pub bounds_gls: Stage<TestOutcome>,
    pub causality_gls: Stage<CausalityResult>,
    pub elasticity: Stage<ElasticityFit>,
    pub groups: GroupLabels,
}

pub fn model_options(config: &StudyConfig) -> ModelOptions {
    ModelOptions {
        burn_in: config.burn_in,
        ratio_lag: config.ratio_lag,
        normalization: config.normalization,
        diagnostics_alpha: config.diagnostics_alpha,
        ..ModelOptions::default()
    }
}

fn unit_roots(
    y: &Series,
    x: &Series,
    test: fn(&Series, f64) -> Result<IntegrationVerdict, crate::econ::EconError>,
    alpha: f64,
) -> Stage<UnitRootPair> {
    Stage::from_result(test(y, alpha).and_then(|asylum| Ok(UnitRootPair { asylum, gdp: test(x, alpha)? })))
}

/// Runs every model and test for one country. Stage failures are recorded in
/// the report rather than returned.
pub fn run_country(code: &str, panel: &CountryPanel, config: &StudyConfig) -> Result<CountryReport, PipelineError> {
    let data = panel
        .countries
        .get(code)
        .ok_or_else(|| PipelineError::UnknownCountry(code.to_string()))?;
    let series = standardize_country(data, &panel.reference)?;
    let opts = model_options(config);
    let n_years = series.asylum_index.len();

    let ratio = Stage::from_result(fit_ratio_model(&series.asylum_index, &series.gdp_index, &opts));
    let loglog = Stage::from_result(fit_loglog(&series.asylum_index, &series.gdp_index));

    let logs = log_transform(&series.asylum_index).and_then(|y| Ok((y, log_transform(&series.gdp_index)?)));
    let (adf, dfgls, bounds, causality, bounds_gls, causality_gls) = match &logs {
        Err(e) => {
            let m = e.to_string();
            (
                Stage::Failed(m.clone()),
                Stage::Failed(m.clone()),
                Stage::Failed(m.clone()),
                Stage::Failed(m.clone()),
                Stage::Failed(m.clone()),
                Stage::Failed(m),
            )
        }
        Ok((y, x)) => {
            let adf = unit_roots(y, x, adf_test, config.alpha_unit_root);
            let dfgls = unit_roots(y, x, dfgls_test, config.alpha_unit_root);
            let short = n_years < MIN_SPAN;
            let short_msg = format!("span of {n_years} years is shorter than {MIN_SPAN}");
            let bounds = if short {
                Stage::NotApplicable(short_msg.clone())
            } else {
                Stage::from_result(ardl_bounds_test(y, x, config.ardl_lag, (config.bounds_lo, config.bounds_hi)))
            };
            let with_ect = matches!(bounds.done(), Some(t) if t.decision == Decision::Reject);
            let causal = |form| {
                if short {
                    Stage::NotApplicable(short_msg.clone())
                } else {
                    Stage::from_result(granger_causality(y, x, form, config.causality_threshold, config.causality_max_lag))
                }
            };
            let causality = causal(GrangerForm::Differenced { include_ect: with_ect });
            let both_stationary = matches!(dfgls.done(), Some(p) if p.asylum.order == 0 && p.gdp.order == 0);
            let (bounds_gls, causality_gls) = if both_stationary {
                (
                    Stage::NotApplicable("both series stationary".into()),
                    causal(GrangerForm::Levels),
                )
            } else {
                (bounds.clone(), causality.clone())
            };
            (adf, dfgls, bounds, causality, bounds_gls, causality_gls)
        }
    };
    let ect_significant = causality
        .done()
        .and_then(|c| c.ect_significance)
        .map(|p| p <= config.ect_alpha);

    let elasticity = Stage::from_result(fit_elasticity_model_with(
        &series.asylum_index,
        &series.gdp_index,
        CoefficientDynamics::Auto,
        &opts,
    ));

    Ok(CountryReport {
        country: code.to_string(),
        span: data.span(),
        n_years,
        zero_floored: series.zero_floored,
        population_interpolated: data.population_interpolated.clone(),
        gdp_sources: data.gdp_sources.clone(),
        series,
        ratio,
        loglog,
        adf,
        dfgls,
        bounds,
        causality,
        ect_significant,
        bounds_gls,
        causality_gls,
        elasticity,
        groups: GroupLabels {
            per_capita: GroupLabel::NoData,
            ratio: GroupLabel::NoData,
            elasticity: GroupLabel::NoData,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tables {
    pub table1: Table,
    pub table2: Table,
    pub table_a1: Table,
    pub table_a2: Table,
    pub table_a3a: Table,
    pub table_a3b: Table,
    pub table_a4: Table,
}

impl Tables {
    pub fn all(&self) -> [(&'static str, &Table); 7] {
        [
            ("table1", &self.table1),
            ("table2", &self.table2),
            ("table_a1", &self.table_a1),
            ("table_a2", &self.table_a2),
            ("table_a3a", &self.table_a3a),
            ("table_a3b", &self.table_a3b),
            ("table_a4", &self.table_a4),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub tool_version: String,
    pub config: StudyConfig,
    pub config_digest: String,
    pub provenance: BTreeMap<String, String>,
    pub excluded: BTreeMap<String, String>,
    pub countries: BTreeMap<String, CountryReport>,
    pub tables: Tables,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Relative table with the share of years above one, its mean and group.
fn relative_table(
    name: &str,
    rel: &YearTable,
    baseline: &str,
    alpha: f64,
    labels: &mut BTreeMap<String, GroupLabel>,
    mean_col: &str,
) -> Table {
    let mut columns = vec!["country".to_string(), "name".to_string()];
    columns.extend(rel.years.iter().map(|y| y.to_string()));
    columns.extend(["proportion_above_one".to_string(), mean_col.to_string(), "group".to_string()]);
    let mut t = Table::new(name, columns);
    for (c, row) in &rel.rows {
        let (above, present) = rel.count_above_one(c).unwrap_or((0, 0));
        let (share, label) = if c == baseline {
            // the baseline sits exactly on one: half by convention
            (Some(0.5), GroupLabel::Baseline)
        } else if present == 0 {
            (None, GroupLabel::NoData)
        } else {
            let label = binomial_group_test(above, present, 0.5, alpha)
                .map(|(_, g)| g.into())
                .unwrap_or(GroupLabel::NoData);
            (Some(above as f64 / present as f64), label)
        };
        labels.insert(c.clone(), label);
        let mut cells = vec![Cell::text(c), Cell::text(country_name(c))];
        cells.extend(row.iter().map(|v| Cell::opt(*v)));
        cells.extend([Cell::opt(share), Cell::opt(rel.row_mean(c)), Cell::text(label.as_str())]);
        t.push(cells);
    }
    t
}

fn num(v: f64) -> Cell {
    Cell::Num(v)
}

fn table1(reports: &BTreeMap<String, CountryReport>) -> Table {
    let columns = [
        "country",
        "name",
        "n",
        "sigma2_eps",
        "sigma2_mu",
        "sigma2_omega",
        "mu_hat",
        "mean_omega",
        "omega_sd",
        "are_pct",
        "sse_pct",
        "box_pierce_accept",
        "arch_accept",
        "mu_restricted",
        "significant",
        "low_reliability",
    ];
    let mut t = Table::new("table1", columns.iter().map(|s| s.to_string()).collect());
    let mut fitted: Vec<(&String, &ElasticityFit)> = reports
        .iter()
        .filter_map(|(c, r)| r.elasticity.done().map(|f| (c, f)))
        .collect();
    fitted.sort_by(|a, b| b.1.mean_omega.total_cmp(&a.1.mean_omega).then(a.0.cmp(b.0)));
    for (c, f) in fitted {
        let d = &f.diagnostics;
        t.push(vec![
            Cell::text(c),
            Cell::text(country_name(c)),
            Cell::Int(f.span as i64),
            num(f.variances[0].value),
            num(f.variances[1].value),
            num(f.variances[2].value),
            num(f.mu_hat),
            num(f.mean_omega),
            num(f.omega_sd_mean),
            num(d.are_pct),
            num(d.sse_pct),
            Cell::yes_no(d.box_pierce.decision == Decision::Accept),
            Cell::yes_no(d.arch.decision == Decision::Accept),
            Cell::yes_no(f.mu_restricted),
            Cell::yes_no(f.significant),
            Cell::yes_no(f.low_reliability),
        ]);
    }
    for (c, r) in reports {
        if r.elasticity.done().is_none() {
            let mut row = vec![Cell::text(c), Cell::text(country_name(c)), Cell::Int(r.n_years as i64)];
            row.extend((3..columns.len()).map(|_| r.elasticity.cell_status()));
            t.push(row);
        }
    }
    t
}

fn direction_label(d: CausalDirection) -> &'static str {
    match d {
        CausalDirection::None => "none",
        CausalDirection::AsylumToGdp => "asylum_to_gdp",
        CausalDirection::GdpToAsylum => "gdp_to_asylum",
        CausalDirection::Bidirectional => "bidirectional",
    }
}

fn decision_label(d: Decision) -> &'static str {
    match d {
        Decision::Accept => "Accept",
        Decision::Reject => "Reject",
        Decision::Undecided => "Undecided",
    }
}

fn cointegration_table(
    name: &str,
    reports: &BTreeMap<String, CountryReport>,
    pick: impl Fn(&CountryReport) -> (&Stage<UnitRootPair>, &Stage<TestOutcome>, &Stage<CausalityResult>),
) -> Table {
    let columns = [
        "country",
        "name",
        "n",
        "order_asylum",
        "order_gdp",
        "bounds_f",
        "bounds_result",
        "asylum_to_gdp_fprob",
        "asylum_to_gdp_lag",
        "gdp_to_asylum_fprob",
        "gdp_to_asylum_lag",
        "direction",
        "ect_significance",
    ];
    let mut t = Table::new(name, columns.iter().map(|s| s.to_string()).collect());
    for (c, r) in reports {
        let (roots, bounds, causality) = pick(r);
        let mut row = vec![Cell::text(c), Cell::text(country_name(c)), Cell::Int(r.n_years as i64)];
        match roots.done() {
            Some(p) => row.extend([Cell::Int(p.asylum.order as i64), Cell::Int(p.gdp.order as i64)]),
            None => row.extend([roots.cell_status(), roots.cell_status()]),
        }
        match bounds.done() {
            Some(b) => row.extend([num(b.statistic), Cell::text(decision_label(b.decision))]),
            None => row.extend([bounds.cell_status(), Cell::text("-")]),
        }
        match causality.done() {
            Some(k) => row.extend([
                num(k.asylum_to_gdp.f_prob),
                Cell::Int(k.asylum_to_gdp.lag as i64),
                num(k.gdp_to_asylum.f_prob),
                Cell::Int(k.gdp_to_asylum.lag as i64),
                Cell::text(direction_label(k.direction)),
                k.ect_significance.map_or(Cell::text("N/A"), num),
            ]),
            None => row.extend((0..6).map(|_| causality.cell_status())),
        }
        t.push(row);
    }
    t
}

/// Processes every country of the panel and assembles the tables.
pub fn run_study(panel: &CountryPanel, config: &StudyConfig) -> Result<StudyReport, PipelineError> {
    let started = Instant::now();
    config.validate()?;
    if panel.countries.is_empty() {
        return Err(PipelineError::EmptyPanel);
    }
    let baseline = config.baseline_country.as_str();
    if !panel.countries.contains_key(baseline) {
        return Err(PipelineError::UnknownCountry(baseline.to_string()));
    }
    let codes: Vec<&String> = panel.countries.keys().collect();
    let results: Vec<Result<CountryReport, PipelineError>> =
        codes.par_iter().map(|c| run_country(c, panel, config)).collect();
    let mut reports = BTreeMap::new();
    for r in results {
        let r = r?;
        reports.insert(r.country.clone(), r);
    }

    let rel_years = config.relative_from..=config.relative_to;
    let per_capita = YearTable::from_series(
        reports.iter().map(|(c, r)| (c.as_str(), &r.series.asylum_pc)),
        rel_years.clone(),
    )
    .relative_to(baseline)?;
    let ratio_rows: Vec<(&str, &Series)> = reports
        .iter()
        .filter_map(|(c, r)| r.ratio.done().map(|f| (c.as_str(), &f.smoothed)))
        .collect();
    let ratio_abs = YearTable::from_series(ratio_rows, rel_years);
    let fits: BTreeMap<String, ElasticityFit> = reports
        .iter()
        .filter_map(|(c, r)| r.elasticity.done().map(|f| (c.clone(), f.clone())))
        .collect();

    let mut labels_pc = BTreeMap::new();
    let mut labels_ratio = BTreeMap::new();
    let mut labels_el = BTreeMap::new();
    let table_a1 = relative_table("table_a1", &per_capita, baseline, config.group_alpha, &mut labels_pc, "average");
    let table_a2 = match ratio_abs.relative_to(baseline) {
        Ok(rel) => relative_table("table_a2", &rel, baseline, config.group_alpha, &mut labels_ratio, "average"),
        Err(_) => relative_table("table_a2", &YearTable { years: ratio_abs.years.clone(), rows: BTreeMap::new() }, baseline, config.group_alpha, &mut labels_ratio, "average"),
    };
    let (table2, table_a4) = match (
        elasticity_year_table(&fits, baseline, config.recent_from..=config.recent_to),
        elasticity_year_table(&fits, baseline, config.elasticity_from..=config.elasticity_to),
    ) {
        (Ok((recent, _)), Ok((_, rel))) => {
            let mut columns = vec!["country".to_string(), "name".to_string()];
            columns.extend(recent.years.iter().map(|y| y.to_string()));
            columns.push("low_reliability".into());
            let mut t2 = Table::new("table2", columns);
            for (c, row) in &recent.rows {
                let mut cells = vec![Cell::text(c), Cell::text(country_name(c))];
                cells.extend(row.iter().map(|v| Cell::opt(*v)));
                cells.push(Cell::yes_no(fits[c].low_reliability));
                t2.push(cells);
            }
            (t2, relative_table("table_a4", &rel, baseline, config.group_alpha, &mut labels_el, "mean"))
        }
        _ => {
            let empty = YearTable { years: Vec::new(), rows: BTreeMap::new() };
            (
                Table::new("table2", vec!["country".into(), "name".into(), "low_reliability".into()]),
                relative_table("table_a4", &empty, baseline, config.group_alpha, &mut labels_el, "mean"),
            )
        }
    };
    for (c, r) in reports.iter_mut() {
        let get = |m: &BTreeMap<String, GroupLabel>| m.get(c).copied().unwrap_or(GroupLabel::NoData);
        r.groups = GroupLabels {
            per_capita: get(&labels_pc),
            ratio: get(&labels_ratio),
            elasticity: get(&labels_el),
        };
    }

    let tables = Tables {
        table1: table1(&reports),
        table2,
        table_a1,
        table_a2,
        table_a3a: cointegration_table("table_a3a", &reports, |r| (&r.adf, &r.bounds, &r.causality)),
        table_a3b: cointegration_table("table_a3b", &reports, |r| (&r.dfgls, &r.bounds_gls, &r.causality_gls)),
        table_a4,
    };
    Ok(StudyReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: config.digest(),
        config: config.clone(),
        provenance: panel.provenance.clone(),
        excluded: panel.excluded.clone(),
        countries: reports,
        tables,
        elapsed: started.elapsed(),
    })
}
