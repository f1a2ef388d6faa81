use std::path::Path;
use std::process::{Command, Output};

fn fraxion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraxion"))
        .args(args)
        .env_remove("FRAXION_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn constants_half_order_in_one_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = fraxion(&["constants", "--n", "1", "--s", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&out);
    assert!((v["gamma_ns"].as_f64().unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    assert_eq!(v["K"].as_f64().unwrap(), -1.0);
    assert_eq!(v["dtn_const"].as_f64().unwrap(), 1.0);
    assert!(v["riesz_const"].is_null());
    assert!(String::from_utf8_lossy(&o.stdout).contains("gamma_ns"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 1, "colour": "blue"}"#).unwrap();
    let o = fraxion(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn invalid_values_exit_with_two() {
    assert_eq!(code(&fraxion(&["constants", "--s", "1"])), 2);
    assert_eq!(code(&fraxion(&["constants", "--n", "4"])), 2);
    assert_eq!(code(&fraxion(&["apply", "--grid-points", "100"])), 2);
    assert_eq!(code(&fraxion(&["verify", "--suite", "nothing"])), 2);
    assert_eq!(code(&fraxion(&["verify", "--tol-scale", "0"])), 2);
    assert_eq!(code(&fraxion(&["apply", "--function", "sombrero"])), 2);
    assert_eq!(code(&fraxion(&["frobnicate"])), 2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let report = dir.path().join("r.json");
    std::fs::write(&cfg, r#"{"suite": "heatsg", "tol-scale": 3.0, "n": 2}"#).unwrap();
    let o = fraxion(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--suite",
        "specfun",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = read_json(&report);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["config_echo"]["suite"], "specfun");
    assert_eq!(v["config_echo"]["tol_scale"], 3.0);
    assert_eq!(v["config_echo"]["n"], 2);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["check_id"].as_str().unwrap().starts_with("specfun.")));
    for key in ["check_id", "status", "measured", "expected", "tolerance", "runtime_ms"] {
        assert!(checks[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = fraxion(&["verify", "--suite", "specfun", "--tol-scale", "1e-12", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = read_json(&report);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["status"] == "fail"));
}

#[test]
fn reports_are_reproducible_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = fraxion(&["verify", "--suite", "quad", "--no-timing", "--report", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let ra = std::fs::read_to_string(&a).unwrap();
    assert!(ra.replace(a.to_str().unwrap(), "").contains("\"runtime_ms\": 0"));
    let rb = std::fs::read_to_string(&b).unwrap();
    assert_eq!(ra.replace(a.to_str().unwrap(), "X"), rb.replace(b.to_str().unwrap(), "X"));
}

#[test]
fn apply_writes_the_anchor_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let o = fraxion(&[
        "apply",
        "--op",
        "fraclap",
        "--n",
        "1",
        "--s",
        "0.5",
        "--function",
        "gaussian:3.141592653589793",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x0,value_re,value_im");
    let origin = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .find(|r| r[0] == 0.0)
        .unwrap();
    assert!((origin[1] - 2.0).abs() < 2e-3);
}

#[test]
fn apply_routes_and_heat_write_csv_to_stdout() {
    for args in [
        &["apply", "--op", "fraclap", "--method", "balakrishnan", "--s", "0.25"][..],
        &["apply", "--op", "heat", "--t", "0.5", "--method", "convolution"][..],
        &["apply", "--op", "riesz", "--n", "2", "--s", "0.5", "--grid-points", "64", "--half-width", "8"][..],
        &["apply", "--op", "fracheat", "--s", "1.5", "--grid-points", "32", "--half-width", "4"][..],
    ] {
        let o = fraxion(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.ends_with("value_re,value_im"), "{header}");
        assert!(text.lines().count() > 32);
    }
}

#[test]
fn extend_writes_rungs_and_dtn_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraxion(&["extend", "--s", "0.5", "--op", "elliptic", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..7 {
        let rung = std::fs::read_to_string(dir.path().join(format!("rung_{k}.csv"))).unwrap();
        assert_eq!(rung.lines().next().unwrap(), "x0,y,value_re,value_im");
    }
    let v = read_json(&dir.path().join("dtn.json"));
    assert_eq!(v["checks"][0]["status"], "pass");
    assert!(v["summary"]["dtn_rel_error"].as_f64().unwrap() < 1e-2);
    assert!(dir.path().join("dtn.csv").exists());
}

#[test]
fn extend_needs_an_output_directory() {
    assert_eq!(code(&fraxion(&["extend", "--s", "0.5"])), 2);
}

#[test]
fn verify_all_passes_with_unique_ids() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("all.json");
    let o = fraxion(&["verify", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&report);
    let ids: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["check_id"].as_str().unwrap()).collect();
    let unique: std::collections::BTreeSet<&str> = ids.iter().copied().collect();
    assert_eq!(unique.len(), ids.len());
    for suite in ["specfun", "quad", "field", "heatsg", "fracops", "extension"] {
        assert!(ids.iter().any(|id| id.starts_with(&format!("{suite}."))), "{suite}");
    }
}
