//! End-to-end tests of the `lhvlab` binary: output shape, config handling,
//! exit codes, and byte stability.

use std::fs;
use std::process::{Command, Output};

fn lhvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhvlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn sweep_csv_has_expected_shape() {
    let out = lhvlab(&[
        "sweep",
        "--model",
        "linear",
        "--trials",
        "5000",
        "--grid",
        "0,1.5707963267948966",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config "));
    assert_eq!(lines[1], "theta,e_hat,se,n_coinc,e_quantum,e_linear");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("0,-1,0,5000,"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    fs::write(&cfg_path, r#"{"model": "linear", "trials": 3000, "seed": 7}"#).unwrap();
    let out_path = dir.path().join("report.json");
    let out = lhvlab(&[
        "rates",
        "--config",
        cfg_path.to_str().unwrap(),
        "--trials",
        "4000",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["config"]["model"], "linear");
    assert_eq!(report["config"]["trials"], 4000); // flag beats file
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["effective_efficiency"], 1.0); // linear model always clicks
}

#[test]
fn bad_inputs_exit_with_code_1() {
    let out = lhvlab(&["sweep", "--model", "bogus", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.json");
    fs::write(&cfg_path, r#"{"model": "sphere", "unknown_field": 1}"#).unwrap();
    let out = lhvlab(&["rates", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = lhvlab(&["sweep", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_exit_codes_and_corruption_hook() {
    // Reduced scale: only shape and exit codes matter here; the full-scale
    // gate lives in the acceptance test.
    let out = lhvlab(&["verify", "--trials", "200000", "--json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 12);
    if out.status.code() == Some(0) {
        assert_eq!(report["all_passed"], true);
    }

    let out = lhvlab(&[
        "verify",
        "--trials",
        "100000",
        "--corrupt-erasure",
        "0.9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["chsh", "--model", "erased-circle", "--trials", "50000"];
    let first = stdout(&lhvlab(&args));
    let second = stdout(&lhvlab(&args));
    assert_eq!(first, second);

    let args = ["franson", "--trials", "30000", "--period", "100"];
    assert_eq!(stdout(&lhvlab(&args)), stdout(&lhvlab(&args)));
}

#[test]
fn franson_record_dump_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("records.csv");
    let out = lhvlab(&[
        "franson",
        "--switching",
        "--trials",
        "1000",
        "--dump-records",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "pair,emission_index,emission_time,a_slot,a_value,b_slot,b_value"
    );
    assert_eq!(lines.len(), 1001);
}
