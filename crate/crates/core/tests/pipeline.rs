use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tsecon::pipeline::{
    emit, load_panel, read_table_csv, run_country, run_study, Cell, Format, Stage, StudyConfig, BUNDLE_FILE,
};
use tsecon::series::Unit;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/eea29")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsecon"))
}

fn cell_str(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => tsecon::pipeline::format_sig6(*v),
        Cell::Empty => String::new(),
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let panel = load_panel(&fixture()).unwrap();
    let config = StudyConfig::default();
    let dirs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for d in &dirs {
        let report = run_study(&panel, &config).unwrap();
        emit(&report, d.path(), &[]).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in names {
        let a = fs::read(dirs[0].path().join(&n)).unwrap();
        let b = fs::read(dirs[1].path().join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn csv_tables_read_back() {
    let panel = load_panel(&fixture()).unwrap();
    let config = StudyConfig::default();
    let report = run_study(&panel, &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit(&report, dir.path(), &[Format::Csv]).unwrap();
    assert!(!dir.path().join(BUNDLE_FILE).exists());
    for (name, table) in report.tables.all() {
        let back = read_table_csv(&dir.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(back.digest, config.digest());
        assert_eq!(back.columns, table.columns);
        let want: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(cell_str).collect()).collect();
        assert_eq!(back.rows, want, "{name}");
    }
}

#[test]
fn json_bundle_keeps_full_precision() {
    let panel = load_panel(&fixture()).unwrap();
    let report = run_study(&panel, &StudyConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit(&report, dir.path(), &[Format::Json]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(BUNDLE_FILE)).unwrap()).unwrap();
    let omega = v["countries"]["IE"]["elasticity"]["value"]["mean_omega"].as_f64().unwrap();
    let fit = report.countries["IE"].elasticity.done().unwrap();
    assert_eq!(omega.to_bits(), fit.mean_omega.to_bits());
    assert_eq!(v["config_digest"], report.config_digest);
}

#[test]
fn baseline_rows_are_one_and_grouped_as_baseline() {
    let panel = load_panel(&fixture()).unwrap();
    let report = run_study(&panel, &StudyConfig::default()).unwrap();
    for t in [&report.tables.table_a1, &report.tables.table_a2, &report.tables.table_a4] {
        let row = t.rows.iter().find(|r| r[0] == Cell::text("IE")).unwrap();
        let years = t.columns.iter().filter(|c| c.parse::<i32>().is_ok()).count();
        assert!(row[2..2 + years].iter().all(|c| *c == Cell::Num(1.0) || *c == Cell::Empty));
        assert_eq!(row.last(), Some(&Cell::text("baseline")));
    }
}

#[test]
fn single_country_run() {
    let mut panel = load_panel(&fixture()).unwrap();
    panel.restrict(&["IE".to_string()].into_iter().collect()).unwrap();
    let report = run_study(&panel, &StudyConfig::default()).unwrap();
    assert_eq!(report.countries.len(), 1);
    assert_eq!(report.tables.table1.keys(), vec!["IE"]);
    assert_eq!(report.tables.table_a1.keys(), vec!["IE"]);
}

#[test]
fn missing_baseline_is_an_input_error() {
    let mut panel = load_panel(&fixture()).unwrap();
    panel.restrict(&["SE".to_string()].into_iter().collect()).unwrap();
    let err = run_study(&panel, &StudyConfig::default()).unwrap_err();
    assert!(err.is_input_error());
}

#[test]
fn model_failures_leave_tests_intact() {
    let panel = load_panel(&fixture()).unwrap();
    let config = StudyConfig { burn_in: 40, ..StudyConfig::default() };
    let report = run_study(&panel, &config).unwrap();
    for r in report.countries.values() {
        assert!(matches!(r.elasticity, Stage::Failed(_)));
        assert!(matches!(r.adf, Stage::Done(_)), "{}", r.country);
        assert!(matches!(r.dfgls, Stage::Done(_)), "{}", r.country);
    }
    let row = &report.tables.table1.rows[0];
    assert_eq!(row[3], Cell::text("failed"));
}

#[test]
fn one_broken_country_leaves_others_untouched() {
    let panel = load_panel(&fixture()).unwrap();
    let config = StudyConfig::default();
    let clean = run_study(&panel, &config).unwrap();
    let mut broken = panel.clone();
    let mt = broken.countries.get_mut("MT").unwrap();
    // GDP moving in lockstep with the reference gives a constant index
    let reference = panel.reference.gdp_pps.clone();
    let (s, e) = (mt.gdp_pps.start_year(), mt.gdp_pps.end_year());
    mt.gdp_pps = reference.window(s, e).unwrap().map(Unit::PpsIndex, |v| 0.9 * v).unwrap().with_country("MT");
    let report = run_study(&broken, &config).unwrap();
    assert!(matches!(report.countries["MT"].elasticity, Stage::Failed(_)));
    for (c, r) in &report.countries {
        if c != "MT" {
            let before = &clean.countries[c];
            assert_eq!(r.elasticity, before.elasticity, "{c}");
            assert_eq!(r.adf, before.adf, "{c}");
            assert_eq!(r.causality, before.causality, "{c}");
        }
    }
    let direct = run_country("MT", &broken, &config).unwrap();
    assert_eq!(direct.elasticity, report.countries["MT"].elasticity);
}

#[test]
fn short_spans_skip_bounds_and_causality() {
    let mut panel = load_panel(&fixture()).unwrap();
    let se = panel.countries.get_mut("SE").unwrap();
    se.asylum = se.asylum.window(2003, 2009).unwrap();
    let r = run_country("SE", &panel, &StudyConfig::default()).unwrap();
    assert!(matches!(r.bounds, Stage::NotApplicable(_)));
    assert!(matches!(r.causality, Stage::NotApplicable(_)));
}

#[test]
fn cli_run_and_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--data"])
        .arg(fixture())
        .arg("--out")
        .arg(out.path())
        .args(["--country", "SE", "--formats", "csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // the baseline is added to a country filter
    let t = read_table_csv(&out.path().join("table_a1.csv")).unwrap();
    let keys: Vec<_> = t.rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(keys, vec!["IE", "SE"]);

    let missing = bin().args(["run", "--data", "/nonexistent", "--out"]).arg(out.path()).status().unwrap();
    assert_eq!(missing.code(), Some(1));

    let cfg = out.path().join("bad.conf");
    fs::write(&cfg, "burn_in = 2\nmystery = 1\n").unwrap();
    let bad = bin()
        .args(["run", "--data"])
        .arg(fixture())
        .arg("--out")
        .arg(out.path())
        .arg("--config")
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(bad.code(), Some(1));

    let usage = bin().args(["run"]).status().unwrap();
    assert_eq!(usage.code(), Some(1));
}

#[test]
fn cli_seed_changes_only_the_digest() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (d, seed) in [(&a, "1"), (&b, "2")] {
        let s = bin()
            .args(["run", "--data"])
            .arg(fixture())
            .arg("--out")
            .arg(d.path())
            .args(["--seed", seed, "--formats", "csv"])
            .status()
            .unwrap();
        assert!(s.success());
    }
    let ta = read_table_csv(&a.path().join("table1.csv")).unwrap();
    let tb = read_table_csv(&b.path().join("table1.csv")).unwrap();
    assert_ne!(ta.digest, tb.digest);
    assert_eq!(ta.rows, tb.rows);
}

#[test]
fn cli_fit_prints_json() {
    let out = bin().args(["fit", "--model", "loglog", "--country", "IE"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["omega"].as_f64().unwrap().is_finite());
    let unknown = bin().args(["fit", "--model", "ratio", "--country", "XX"]).status().unwrap();
    assert_eq!(unknown.code(), Some(1));
}
