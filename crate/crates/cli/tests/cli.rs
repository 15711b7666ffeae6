//! End-to-end tests of the `panel-power` binary, including golden files.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use panel_power::estimators::ips_statistic;
use panel_power::io::read_panel;
use panel_power::DeterministicCase;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_panel-power"));
    cmd.env_remove("PANEL_POWER_OUTPUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert_eq!(actual, expected, "output differs from golden file {name}");
}

/// Golden files are taken relative to the data directory so they do not
/// depend on where the repository is checked out.
fn portable(text: &str) -> String {
    text.replace(data("").to_str().unwrap(), "<data>/")
}

#[test]
fn power_table_csv_matches_golden() {
    let out = stdout(&run(&["power-table", "--level", "0.05", "--format", "csv"]));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.matches(',').count() >= 8));
    check_golden("power_table.csv", &out);
}

#[test]
fn power_table_json_matches_golden() {
    let out = stdout(&run(&["power-table"]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["result"].as_array().unwrap().len(), 32);
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    check_golden("power_table.json", &out);
}

#[test]
fn df_cdf_upper_tail() {
    let out = stdout(&run(&["df-cdf", "--model", "1", "--x", "50", "--c", "0"]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    let cdf = doc["result"]["points"][0]["cdf"].as_f64().unwrap();
    assert!(cdf >= 0.999);
}

#[test]
fn test_command_matches_library() {
    let input = data("panel.csv");
    let out = stdout(&run(&[
        "test",
        "--input",
        input.to_str().unwrap(),
        "--case",
        "intercept",
        "--variant",
        "ips-zmu",
    ]));
    let doc: Value = serde_json::from_str(&out).unwrap();
    let got = doc["result"][0]["statistic"].as_f64().unwrap();
    let want = ips_statistic(&read_panel(&input).unwrap(), DeterministicCase::Intercept)
        .unwrap()
        .statistic;
    assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{got} vs {want}");
    assert!(doc["result"][0]["p_value"].as_f64().is_some());
    check_golden("test_panel.json", &portable(&out));
}

#[test]
fn test_command_csv_matches_golden() {
    let input = data("panel.csv");
    let out = stdout(&run(&["test", "--input", input.to_str().unwrap(), "--format", "csv"]));
    check_golden("test_panel.csv", &portable(&out));
}

#[test]
fn simulate_is_reproducible_and_matches_golden() {
    let args = [
        "simulate", "--variant", "ips-zmu", "--variant", "llc-t22", "--n", "10", "--t", "20", "--dist",
        "uniform:0:8", "--reps", "40", "--seed", "3", "--format", "csv",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(a.contains("# seed: 3"));
    check_golden("simulate.csv", &a);
}

#[test]
fn edgeworth_and_moments_match_golden() {
    let e = stdout(&run(&[
        "edgeworth", "--variant", "llc-t21", "--x", "-1", "--x", "0", "--x", "1.5", "--n", "25", "--dist",
        "uniform:0:1", "--format", "csv",
    ]));
    check_golden("edgeworth.csv", &e);
    let m = stdout(&run(&["moments", "--case", "intercept", "--format", "csv"]));
    check_golden("moments_intercept.csv", &m);
}

#[test]
fn power_curve_has_one_column_per_variant() {
    let out = stdout(&run(&[
        "power-curve", "--variant", "ips-z", "--variant", "llc-t1", "--c-max", "4", "--points", "5", "--format",
        "csv",
    ]));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "c,ips-z,llc-t1");
    assert_eq!(rows.len(), 6);
    assert!(rows[1].starts_with("0.0,0.05,0.05"));
}

#[test]
fn errors_are_structured_and_nonzero() {
    let ragged = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(ragged.path(), "unit,time,value\na,0,1\na,1,2\nb,0,1\n").unwrap();
    let out = run(&["test", "--input", ragged.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"]["kind"], "ragged-panel");

    let out = run(&["power-table", "--level", "1.5"]);
    assert!(!out.status.success());
    let out = run(&["df-cdf", "--model", "7", "--x", "1"]);
    assert!(!out.status.success());
}

#[test]
fn config_files_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"format":"csv","command":{"name":"power","variant":"llc-t1","distribution":{"kind":"uniform","a":0,"b":8}}}"#).unwrap();
    let out = stdout(&run(&["run", "--config", good.to_str().unwrap()]));
    assert!(out.contains("llc-t1,\"U[0,8]\",0.05,"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command":{"name":"power-table","level":0.05,"extra":1}}"#).unwrap();
    let out = run(&["run", "--config", bad.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("PANEL_POWER_OUTPUT_DIR", dir.path())
        .args(["power-table", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("power-table.csv")).unwrap();
    assert!(written.contains("distribution,llc-t1"));
}
