use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conespec"));
    c.env_remove("CONESPEC_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_exit_codes_follow_verdict() {
    let stable = run(&["verify", "--dim", "7"]);
    assert_eq!(stable.status.code(), Some(0));
    assert_eq!(json(&stable)["result"]["verdict"], Value::Bool(true));
    let unstable = run(&["verify", "--dim", "4"]);
    assert_eq!(unstable.status.code(), Some(1));
    assert_eq!(json(&unstable)["result"]["verdict"], Value::Bool(false));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["bogus"]).status.code(), Some(64));
    assert_eq!(run(&["verify"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "--dim", "x"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "--dim", "2"]).status.code(), Some(64));
    assert_eq!(run(&["report", "--dims", "9..4"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn envelope_has_sorted_keys_and_optional_timestamp() {
    let out = run(&["cone", "--dim", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["command", "config", "result", "version"]);
    assert_eq!(v["command"], "cone");
    let stamped = json(&run(&["--timestamp", "cone", "--dim", "5"]));
    assert!(stamped.get("timestamp").is_some());
}

#[test]
fn report_is_deterministic_and_well_formed() {
    let a = run(&["report", "--dims", "3..10"]);
    let b = run(&["report", "--dims", "3..10"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "d,theta0,H,lambda1,stable,kernel0,kernel_d1,gap");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for (row, d) in rows.iter().zip(3..) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], d.to_string());
        assert_eq!(cols[4], if d >= 7 { "true" } else { "false" });
        assert_eq!(cols[5], d.to_string());
        assert_eq!(cols[6], (d - 1).to_string());
    }
}

#[test]
fn config_file_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"grid_n": 1024}"#);
    let v = json(&run(&["--config", &cfg, "cone", "--dim", "3"]));
    assert_eq!(v["config"]["grid_n"], 1024);
    let out = bin().env("CONESPEC_CONFIG", &cfg).args(["cone", "--dim", "3"]).output().unwrap();
    assert_eq!(json(&out)["config"]["grid_n"], 1024);

    let broken = write(dir.path(), "broken.json", "{grid_n: ");
    assert_eq!(run(&["--config", &broken, "cone", "--dim", "3"]).status.code(), Some(64));
    let invalid = write(dir.path(), "invalid.json", r#"{"root_tol": -1}"#);
    assert_eq!(run(&["--config", &invalid, "cone", "--dim", "3"]).status.code(), Some(64));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["--config", missing.to_str().unwrap(), "cone", "--dim", "3"]).status.code(), Some(64));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("modes.json");
    let out = run(&["--out", path.to_str().unwrap(), "modes", "--dim", "5", "--mu-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "modes");
}

#[test]
fn sl_crosscheck_and_dirichlet_calibration() {
    let v = json(&run(&["sl", "--dim", "7", "--mu", "0", "--bc", "dirichlet", "--count", "3", "--crosscheck"]));
    let r = &v["result"];
    let l1 = r["eigen"][0]["lambda"].as_f64().unwrap();
    assert!((l1 - 6.0).abs() < 1e-7);
    let fd = r["fd_richardson"][0].as_f64().unwrap();
    assert!((l1 - fd).abs() < 1e-5);
}

#[test]
fn boundary_spectrum_csv() {
    let out = run(&["boundary-spectrum", "--dim", "7", "--count", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ell,parity,ell_k");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,even,"));
}

#[test]
fn particular_from_modes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"grid_n": 1024}"#);
    let modes = write(dir.path(), "modes.json", r#"{"boundary_coeffs": {"0": 0.5, "2": 1.0, "3": -0.8}}"#);
    let out = run(&["--config", &cfg, "particular", "--dim", "7", "--beta", "0.7", "--modes", &modes]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    assert!(r["slope"].as_f64().unwrap() <= 0.35);
    assert!(r["interior_residual"].as_f64().unwrap() < 1e-6);

    let bad = write(dir.path(), "bad.json", r#"{"coeffs": {}}"#);
    let out = run(&["--config", &cfg, "particular", "--dim", "7", "--beta", "0.7", "--modes", &bad]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn weiss_on_cone_and_field_file() {
    let v = json(&run(&["weiss", "--dim", "5"]));
    let w: Vec<f64> = v["result"]["W"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(w.len(), 4);
    assert!(w.iter().all(|x| (x - w[0]).abs() < 1e-8));

    let dir = tempfile::tempdir().unwrap();
    let field = write(
        dir.path(),
        "field.json",
        r#"{"terms": [
            {"profile": "cone", "radial": {"kind": "power", "coeff": 1.0, "exponent": 1.0}},
            {"profile": "axial", "radial": {"kind": "power", "coeff": 0.001, "exponent": 0.0}}
        ]}"#,
    );
    let out = run(&["weiss", "--dim", "5", "--field", &field, "--radii", "1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    for i in 0..2 {
        let lhs = r["dW_lhs"][i].as_f64().unwrap();
        let rhs = r["dW_rhs"][i].as_f64().unwrap();
        let rem = r["dW_remainder"][i].as_f64().unwrap();
        assert!((lhs - rhs - rem).abs() <= 1e-4 * lhs.abs().max(rhs.abs()));
    }
}

#[test]
fn criticality_exit_code() {
    let out = run(&["criticality", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["critical"], Value::Bool(true));
    let strict = run(&["criticality", "--dim", "3", "--tol", "1e-12"]);
    assert_eq!(strict.status.code(), Some(1));
}
