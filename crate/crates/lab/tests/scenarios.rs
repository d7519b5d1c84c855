use std::path::Path;

use hartree_lab::run::{REPORT_FILE, TRAJECTORY_FILE};
use hartree_lab::{parse_scenario, run_scenario, sweep, Axis, RunOptions, Scenario};
use serde_json::Value;

fn doc(c: f64, extra: &str) -> String {
    format!(
        "[model]\np = 3.0\ngamma = 2.0\n\
         [grid]\nr_max = 20.0\nn = 256\n\
         [potential]\nkind = \"gaussian\"\namplitude = 1.0\nwidth = 1.0\n\
         [initial]\nkind = \"scaled-ground-state\"\nc = {c}\n\
         [evolve]\ndt = 2e-3\nt_end = 0.4\nsample_every = 10\n{extra}"
    )
}

fn scenario(c: f64, extra: &str) -> Scenario {
    parse_scenario(&doc(c, extra)).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn below_threshold_run_reports_threshold_pass() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(0.5, "[diagnostics]\ncoercivity = true\nmonitor = { radius = 10.0, eps = 0.5 }\n");
    let report = run_scenario(&s, dir.path(), RunOptions::default()).unwrap();
    assert!(report.all_pass, "{:?}", report.failures);
    assert_eq!(report.exit_code(), 0);
    let v = json(&dir.path().join(REPORT_FILE));
    assert_eq!(v["format"], "hartree-report/1");
    assert_eq!(v["thresholds"]["threshold_pass"], true);
    assert_eq!(v["thresholds"]["cond1_me_pass"], true);
    assert_eq!(v["thresholds"]["cond2_pass"], true);
    assert!(v["monitor"]["criterion_met"].is_boolean());
    assert_eq!(v["scenario"]["initial"]["c"], 0.5);
    let csv = std::fs::read_to_string(dir.path().join(TRAJECTORY_FILE)).unwrap();
    assert!(csv.starts_with("# format=hartree-trajectory/1\n"));
    assert!(csv.contains("\nt,M,E,E0,P,grad_sq,lambda_sq,z,zp,zpp,mass_in_ball_R,exported_mass\n"));
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + report.samples);
}

#[test]
fn soliton_monitor_is_negative_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let extra = "[evolve.sponge]\nenabled = false\n[diagnostics]\nthresholds = false\nmonitor = { radius = 10.0, eps = 1.0, expect = false }\n";
    let s = parse_scenario(&doc(1.0, extra).replace("amplitude = 1.0\nwidth = 1.0\n", "").replace("kind = \"gaussian\"\n", "kind = \"zero\"\n")).unwrap();
    let report = run_scenario(&s, dir.path(), RunOptions::default()).unwrap();
    let m = report.monitor.unwrap();
    assert!(!m.criterion_met);
    assert!(report.all_pass);
    // Expecting scattering from the soliton must fail the run.
    let wrong = parse_scenario(&s.to_toml().replace("expect = false", "expect = true")).unwrap();
    let report = run_scenario(&wrong, dir.path(), RunOptions::default()).unwrap();
    assert_eq!(report.failures, vec!["monitor".to_string()]);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn identical_documents_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let s = scenario(0.8, "[evolve.sponge]\nenabled = false\n[diagnostics]\nidentity = true\nconservation = {}\n");
    run_scenario(&s, a.path(), RunOptions { morawetz: Some(0.1) }).unwrap();
    run_scenario(&s, b.path(), RunOptions { morawetz: Some(0.1) }).unwrap();
    for f in [TRAJECTORY_FILE, REPORT_FILE, "morawetz.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn snapshots_use_the_field_format() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(0.5, "snapshot_every = 10\n");
    run_scenario(&s, dir.path(), RunOptions::default()).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 3, "{names:?}");
    let u: hartree_core::Field64 = hartree_core::io::load_field(&dir.path().join("snapshots").join(&names[2])).unwrap();
    assert_eq!(u.grid().n(), 256);
    // A snapshot is a valid initial-data file for the same grid.
    let path = dir.path().join("snapshots").join(&names[2]);
    let text = doc(0.5, "").replace(
        "kind = \"scaled-ground-state\"\nc = 0.5\n",
        &format!("kind = \"file\"\npath = {:?}\n", path.to_str().unwrap()),
    );
    let from_file = parse_scenario(&text).unwrap();
    assert!(run_scenario(&from_file, &dir.path().join("again"), RunOptions::default()).is_ok());
}

#[test]
fn sweep_over_c_matches_homogeneity() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(0.5, "");
    let values = [0.3, 0.5, 0.8];
    let report = sweep(&s, Axis::C, &values, dir.path(), Some(2)).unwrap();
    // p = 3, σ_c = 1.
    for (row, c) in report.rows.iter().zip(values) {
        let expected = f64::powf(c, 2.0 * 3.0 + 2.0);
        let got = row.threshold_ratio.unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected, "c = {c}: {got} vs {expected}");
        assert_eq!(row.status, "pass");
    }
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + values.len());
    assert!(csv.lines().nth(1).unwrap().starts_with("c,status,threshold_ratio"));
}

#[test]
fn sweep_isolates_failures_and_accepts_no_values() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(0.5, "");
    let report = sweep(&s, Axis::P, &[3.0, 1.5, 9.0], dir.path(), None).unwrap();
    assert_eq!(report.rows[0].status, "pass");
    assert_eq!(report.rows[1].status, "error");
    assert!(report.rows[1].failures[0].contains("p ≥ 2 required"));
    assert_eq!(report.rows[2].status, "error");
    assert!(dir.path().join("p-000").join(REPORT_FILE).is_file());
    assert!(dir.path().join("p-001").join("error.json").is_file());

    let empty = tempfile::tempdir().unwrap();
    let report = sweep(&s, Axis::C, &[], empty.path(), None).unwrap();
    assert!(report.rows.is_empty() && report.all_pass());
}

#[test]
fn dt_halving_shrinks_energy_drift_fourfold() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(0.8, "[evolve.sponge]\nenabled = false\n[diagnostics]\nconservation = {}\n");
    let report = sweep(&s, Axis::Dt, &[4e-3, 2e-3, 1e-3], dir.path(), None).unwrap();
    let drift: Vec<f64> = report.rows.iter().map(|r| r.energy_drift.unwrap()).collect();
    for w in drift.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "drifts {drift:?}");
    }
}
