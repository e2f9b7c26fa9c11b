use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opcqkd_cli::{parse_values, SweepAxis, SWEEP_HEADER};
use serde_json::Value;

fn opcqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcqkd")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(p).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn verify_symmetric_dim8_passes() {
    let out = opcqkd(&["verify", "--dim", "8", "--q", "5", "--trials", "100", "--seed", "1", "--mode", "symmetric"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["max_deviation"].as_f64().unwrap() <= 1e-9);
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["trials"], 100);
}

#[test]
fn verify_general_mode_passes() {
    let out = opcqkd(&["verify", "--dim", "6", "--q", "3", "--trials", "20", "--seed", "2", "--mode", "general"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["max_deviation"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn verify_without_segments_is_exact() {
    let out = opcqkd(&["verify", "--dim", "4", "--q", "0", "--trials", "3", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["max_deviation"].as_f64(), Some(0.0));
}

#[test]
fn verify_rejects_odd_and_tiny_dims() {
    for dim in ["3", "0", "1"] {
        let out = opcqkd(&["verify", "--dim", dim, "--q", "1"]);
        assert_eq!(out.status.code(), Some(2), "dim {dim}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--dim"));
    }
}

#[test]
fn verify_without_seed_reports_one() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("verify.json");
    let out = opcqkd(&["verify", "--dim", "2", "--q", "2", "--trials", "2", "--out", s(&manifest)]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let m = read_json(&manifest);
    assert!(m["seed"].is_u64());
    assert_eq!(m["seed"], report["seed"]);
    assert_eq!(m["results"], report);
    assert_eq!(m["command"], "verify");
}

#[test]
fn session_without_eve_has_zero_qber() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n_cores": 2, "q_perturbations": 5, "n_rounds": 4000, "seed": 1}"#);
    let out_path = dir.path().join("stats.json");
    let out = opcqkd(&["session", "--config", s(&cfg), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let m = read_json(&out_path);
    assert_eq!(m["results"]["qber"].as_f64(), Some(0.0));
    assert_eq!(m["results"]["errors"], 0);
    assert_eq!(m["seed"], 1);
    assert!(m["started_at"].is_string() && m["finished_at"].is_string());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("qber"));
    assert!(table.contains("signal"));
}

#[test]
fn session_with_intercept_resend_d4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"n_cores": 2, "q_perturbations": 5, "n_rounds": 8000, "eve": "intercept_resend", "seed": 2,
            "intensities": [{"mu": 5.0, "role": "signal"}]}"#,
    );
    let out_path = dir.path().join("stats.json");
    assert_eq!(opcqkd(&["session", "--config", s(&cfg), "--out", s(&out_path)]).status.code(), Some(0));
    let r = &read_json(&out_path)["results"];
    let qber = r["qber"].as_f64().unwrap();
    let n = r["sifted"].as_f64().unwrap();
    let sigma = (0.375f64 * 0.625 / n).sqrt();
    assert!((qber - 0.375).abs() < 4.0 * sigma, "qber {qber}");
}

#[test]
fn session_records_generated_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n_cores": 1, "q_perturbations": 2, "n_rounds": 50}"#);
    let out_path = dir.path().join("stats.json");
    assert_eq!(opcqkd(&["session", "--config", s(&cfg), "--out", s(&out_path)]).status.code(), Some(0));
    let m = read_json(&out_path);
    assert!(m["seed"].is_u64());
    assert_eq!(m["config"]["seed"], m["seed"]);
}

#[test]
fn session_missing_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("stats.json");
    let out = opcqkd(&["session", "--config", s(&dir.path().join("nope.json")), "--out", s(&out_path)]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out_path.exists());
}

#[test]
fn session_parse_errors_name_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("stats.json");

    let cfg = write_config(dir.path(), "a.json", "{\n  \"n_cores\": 2,\n  \"q_perturbations\": 1,\n  \"n_round\": 10\n}");
    let out = opcqkd(&["session", "--config", s(&cfg), "--out", s(&out_path)]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_ne!(out.status.code(), Some(0));
    assert!(err.contains("n_round") && err.contains("line 4"), "{err}");

    let cfg = write_config(dir.path(), "b.json", "{\n  \"n_cores\": \"two\"\n}");
    let err = String::from_utf8_lossy(&opcqkd(&["session", "--config", s(&cfg), "--out", s(&out_path)]).stderr).into_owned();
    assert!(err.contains("line 2"), "{err}");

    let cfg = write_config(dir.path(), "c.json", r#"{"n_cores": 3, "q_perturbations": 1, "n_rounds": 10}"#);
    let err = String::from_utf8_lossy(&opcqkd(&["session", "--config", s(&cfg), "--out", s(&out_path)]).stderr).into_owned();
    assert!(err.contains("n_cores"), "{err}");

    assert!(!out_path.exists());
}

#[test]
fn sweep_over_q_without_eve_is_error_free() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n_cores": 2, "q_perturbations": 1, "n_rounds": 1500, "seed": 4}"#);
    let csv_path = dir.path().join("sweep.csv");
    let out = opcqkd(&[
        "sweep", "--config", s(&cfg), "--axis", "q_perturbations", "--values", "0,1,2,3,4,5,6,7,8", "--out", s(&csv_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&csv_path);
    assert_eq!(rows[0], SWEEP_HEADER);
    assert_eq!(rows.len(), 10);
    for (k, row) in rows[1..].iter().enumerate() {
        assert_eq!(row.len(), SWEEP_HEADER.len());
        assert_eq!(row[0], k.to_string());
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn sweep_over_mu_signal_raises_gain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n_cores": 1, "q_perturbations": 3, "n_rounds": 6000, "seed": 5}"#);
    let csv_path = dir.path().join("sweep.csv");
    let out = opcqkd(&["sweep", "--config", s(&cfg), "--axis", "mu_signal", "--values", "0.1,0.5", "--out", s(&csv_path)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&csv_path);
    let g: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(g[1] > g[0], "{g:?}");
    assert_eq!(rows[1][0], "0.1");
}

#[test]
fn sweep_usage_errors_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"n_cores": 1, "q_perturbations": 1, "n_rounds": 10, "seed": 6}"#);
    let csv_path = dir.path().join("sweep.csv");
    for args in [
        vec!["--axis", "mu_signal", "--values", ""],
        vec!["--axis", "wavelength", "--values", "1"],
        vec!["--axis", "n_cores", "--values", "1.5"],
        vec!["--axis", "kappa_l", "--values", "abc"],
    ] {
        let mut full = vec!["sweep", "--config", s(&cfg), "--out", s(&csv_path)];
        full.extend(args.iter().copied());
        assert_eq!(opcqkd(&full).status.code(), Some(2), "{args:?}");
    }
    // a value the session itself rejects fails without partial output
    let out = opcqkd(&["sweep", "--config", s(&cfg), "--axis", "n_cores", "--values", "1,3", "--out", s(&csv_path)]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!csv_path.exists());
}

#[test]
fn parse_values_rules() {
    let raw = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert_eq!(parse_values(&raw(&["0.1", " 0.5 "]), SweepAxis::MuSignal).unwrap(), vec![0.1, 0.5]);
    assert!(parse_values(&raw(&[]), SweepAxis::KappaL).is_err());
    assert!(parse_values(&raw(&["", " "]), SweepAxis::KappaL).is_err());
    assert!(parse_values(&raw(&["-1"]), SweepAxis::QPerturbations).is_err());
    assert!(parse_values(&raw(&["inf"]), SweepAxis::KappaL).is_err());
    assert_eq!(parse_values(&raw(&["-0.3"]), SweepAxis::KappaL).unwrap(), vec![-0.3]);
}
