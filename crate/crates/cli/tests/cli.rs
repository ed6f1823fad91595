use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ncfun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncfun")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

#[test]
fn commutator_of_matrix_units() {
    let out = ncfun(&["eval-poly", "--poly", s(&fixture("commutator.json")), "--point", s(&fixture("e12_e21.json"))]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v, serde_json::json!([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]));
    let manifest: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(manifest["command"], "eval-poly");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn file_outputs_get_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("m.json");
    let out = ncfun(&["measure-eval", "--measure", s(&fixture("two_atoms.json")), "--x", s(&fixture("scalar_half.json")), "--out", s(&out_path)]);
    assert!(out.status.success());
    // Atoms at ±1 with equal weight give h(x) = (1 + x²)/(1 − x²).
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let re = v[0][0][0].as_f64().unwrap();
    assert!((re - 1.25 / 0.75).abs() < 1e-12);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "measure-eval");
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn herglotz_approx_writes_one_polynomial_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = ncfun(&[
        "herglotz-approx", "--colligation", s(&fixture("stock_colligation.json")),
        "--delta", s(&fixture("identity_delta.json")), "--schedule", "0.5,0.75",
        "--seed", "42", "--samples", "40", "--out-dir", s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("q_1.json").is_file());
    assert!(dir.path().join("q_2.json").is_file());
    assert!(dir.path().join("manifest.json").is_file());
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "step,r_n,L_n,deg_q,sup_error_measured,bound,psd_margin");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,0.5,5,"));
}

#[test]
fn derivative_of_stock_function() {
    let out = ncfun(&[
        "derivative", "--fn", s(&fixture("stock_fn.json")), "--x", s(&fixture("point_x.json")),
        "--y", s(&fixture("point_y.json")), "--z", s(&fixture("direction_z.json")),
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let t = v["t"].as_f64().unwrap();
    assert!(t <= 1.0 && t.log2().fract() == 0.0);
    assert_eq!(v["value"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = ncfun(&["eval-poly", "--poly", "/nonexistent.json", "--point", s(&fixture("e12_e21.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");
}

#[test]
fn missing_flag_is_a_usage_error() {
    assert_eq!(ncfun(&["truncate", "--rho", "0.5"]).status.code(), Some(2));
}

#[test]
fn invalid_schedule_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = ncfun(&[
        "herglotz-approx", "--colligation", s(&fixture("stock_colligation.json")),
        "--delta", s(&fixture("identity_delta.json")), "--schedule", "0.75,0.5",
        "--seed", "1", "--out-dir", s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn point_outside_domain_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("far.json");
    std::fs::write(&point, r#"{"n":1,"d":1,"mats":[[[[1.5,0.0]]]]}"#).unwrap();
    let out = ncfun(&[
        "eval-realization", "--colligation", s(&fixture("stock_colligation.json")),
        "--delta", s(&fixture("identity_delta.json")), "--point", s(&point),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "numerical");
}

#[test]
fn truncation_over_degree_cap_fails() {
    let out = ncfun(&[
        "truncate", "--colligation", s(&fixture("stock_colligation.json")),
        "--delta", s(&fixture("identity_delta.json")), "--rho", "0.5", "--order", "10",
        "--degree-cap", "3", "--out", "/tmp/unused_p.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!Path::new("/tmp/unused_p.json").exists());
}

#[test]
fn verify_writes_report_and_rejects_negative_tol() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = ncfun(&["verify", "--suite", "cayley", "--samples", "10", "--seed", "3", "--report", s(&report)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["suite"], "cayley");
    assert_eq!(v["passed"], 10);
    let bad = ncfun(&["verify", "--suite", "cayley", "--samples", "10", "--seed", "3", "--tol", "-1"]);
    assert_eq!(bad.status.code(), Some(2));
    // Functions attaining |f| = |δ| exactly cannot pass without slack.
    let strict = ncfun(&["verify", "--suite", "schwarz", "--samples", "50", "--seed", "3", "--tol", "1e-300"]);
    assert_eq!(strict.status.code(), Some(1));
}
