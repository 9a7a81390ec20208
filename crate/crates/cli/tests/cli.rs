use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dpplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpplab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.ndjson"), dir.path().join("b.ndjson"));
    let args = [
        "sample",
        "--c",
        "1",
        "--decoration",
        "dirac",
        "--observe-low",
        "0",
        "--n",
        "3",
        "--seed",
        "7",
    ];
    for p in [&a, &b] {
        let o = dpplab(&[&args[..], &["--out", path_str(p)]].concat());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let lines: Vec<Value> = String::from_utf8(text)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["seed"], 7);
    assert_eq!(lines[0]["config"]["observe_low"], 0.0);
    for (i, l) in lines[1..].iter().enumerate() {
        assert_eq!(l["index"], i);
        assert!(l["points"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64().unwrap() >= 0.0));
    }
}

#[test]
fn zero_samples_writes_header_only() {
    let o = dpplab(&["sample", "--observe-low", "0", "--n", "0"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("\"command\":\"sample\""));
    let o = dpplab(&["extract", "--y", "3", "--n", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    std::fs::write(&out, "keep").unwrap();
    let args = [
        "curve",
        "--grid",
        "0,1,2",
        "--n-reps",
        "100",
        "--out",
        path_str(&out),
    ];
    let o = dpplab(&args);
    assert_eq!(code(&o), 2);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "keep");
    let o = dpplab(&[&args[..], &["--force"]].concat());
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("y,value,se"));
}

#[test]
fn max_curve_is_gumbel_shaped() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("max.csv");
    let o = dpplab(&[
        "curve",
        "--f",
        "max",
        "--grid",
        "-2,4,13",
        "--n-reps",
        "20000",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0);
    let mut rows = csv::Reader::from_path(&out).unwrap();
    let mut n = 0;
    for r in rows.records() {
        let r = r.unwrap();
        let (y, v, se): (f64, f64, f64) = (
            r[0].parse().unwrap(),
            r[1].parse().unwrap(),
            r[2].parse().unwrap(),
        );
        let gumbel = (-(-y).exp()).exp();
        assert!(
            (v - gumbel).abs() <= 4.0 * se + 1e-3,
            "y = {y}: {v} vs {gumbel}"
        );
        n += 1;
    }
    assert_eq!(n, 13);
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("max.json")).unwrap())
            .unwrap();
    assert_eq!(meta["f"], "max");
    assert_eq!(meta["config"]["n_reps"], 20000);
}

#[test]
fn single_point_grid_gives_one_row() {
    let o = dpplab(&["curve", "--grid", "0,0,1", "--n-reps", "200"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn worker_count_does_not_change_output() {
    let args = [
        "curve",
        "--f",
        "bump:0.5,0.5,1",
        "--grid",
        "-1,2,4",
        "--n-reps",
        "500",
    ];
    let one = dpplab(&[&["--workers", "1"], &args[..]].concat());
    let three = dpplab(&[&["--workers", "3"], &args[..]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn verify_gumbel_identity_passes() {
    let o = dpplab(&["verify", "gumbel-identity"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["pass"], true);
    assert!(r["criteria"][0]["statistic"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["seed"]["master"], 20240531);
}

#[test]
fn verify_overshoot_passes() {
    let o = dpplab(&["verify", "overshoot", "--c", "1", "--y", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ks = r["parts"][0]["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "ks_exp")
        .unwrap();
    assert!(ks["statistic"].as_f64().unwrap() <= 0.02);
}

#[test]
fn verify_eq31_reports_a_table() {
    let o = dpplab(&[
        "verify", "eq31", "--matrix", "small", "--c", "1", "--n-reps", "20000",
    ]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in ["decoration", "f", "tau_quadrature", "tau_fit", "se", "pass"] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(code(&o), if r["pass"] == true { 0 } else { 1 });
    assert_eq!(r["run_config"]["matrix"], "small");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&dpplab(&["verify", "no-such-check"])), 2);
    assert_eq!(code(&dpplab(&["sample", "--decoration", "finite:0.5"])), 2);
    assert_eq!(code(&dpplab(&["frobnicate"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, "{\n  \"c\": 1,\n  \"colour\": 2\n}\n").unwrap();
    let o = dpplab(&["sample", "--config", path_str(&cfg)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "sample", "c": 2, "n": 2, "observe_low": 0, "seed": 3}"#,
    )
    .unwrap();
    let o = dpplab(&["sample", "--config", path_str(&cfg), "--c", "1.5"]);
    assert_eq!(code(&o), 0);
    let head: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(head["config"]["c"], 1.5);
    assert_eq!(head["config"]["n"], 2);
    assert_eq!(head["seed"], 3);
    assert_eq!(code(&dpplab(&["curve", "--config", path_str(&cfg)])), 2);
}

#[test]
fn bbm_wave_writes_centered_columns() {
    let o = dpplab(&[
        "bbm", "wave", "--t", "3", "--n-reps", "300", "--betas", "2,3", "--grid", "-1,1,3",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "beta,y,g_hat,se");
    assert_eq!(lines.len(), 7);
    assert!(lines[2].starts_with("2,0,0.5,"));
}

#[test]
fn tau_fit_reports_quadrature_shift() {
    let o = dpplab(&[
        "tau-fit",
        "--f",
        "bump:0.5,0.5,1",
        "--decoration",
        "finite:0,-0.7",
        "--n-reps",
        "20000",
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (fit, quad) = (
        r["fit"]["tau"].as_f64().unwrap(),
        r["tau_quadrature"].as_f64().unwrap(),
    );
    assert!((fit - quad).abs() <= 3.0 * r["fit"]["se"].as_f64().unwrap());
}
