use std::process::Command;

use serde_json::Value;

fn tn(args: &[&str]) -> (i32, String, String) {
    tn_cli::execute(std::iter::once("tn").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let (code, out, err) = tn(&a);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).expect("valid json")
}

fn scratch(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("tn-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn tsirelson_of_a_basis_vector() {
    let (code, out, _) = tn(&["norm", "tsirelson", "--schedule", "paper:1", "--vector", "0:1"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1");
}

#[test]
fn tsirelson_three_points() {
    let (code, out, _) = tn(&["norm", "tsirelson", "--schedule", "m=2;n=3", "--vector", "0:1,5:1,9:1"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "3/2");
}

#[test]
fn malformed_vector_reports_offset() {
    let (code, out, err) = tn(&["norm", "tsirelson", "--vector", "0:1,5:"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("byte 6"), "{err}");
}

#[test]
fn k_bounds_print_a_witness() {
    let v = json(&["norm", "k-bounds", "--vector", "1:1,2:1"]);
    let r = &v["result"];
    assert!(r["lower"].is_string());
    assert!(r["upper"].is_string());
    assert!(r.to_string().contains("witness"), "{r}");
}

#[test]
fn closure_of_two_points() {
    let (code, out, _) = tn(&["rho", "closure", "--set", "2,5", "--p", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "0,1,2,3,4,5");
}

#[test]
fn axioms_on_naturals() {
    let (code, out, _) = tn(&["rho", "axioms", "--set", "0,1,2,3"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.trim() == "violations: 0"), "{out}");
}

#[test]
fn universal_queue_certificates() {
    let q = scratch("models.json", "[[[0,1],[1,0]],[[0,2,1],[2,0,3],[1,3,0]]]");
    let (code, out, err) = tn(&["rho", "universal", "--queue", q.to_str().unwrap(), "--bound", "w*8"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().filter(|l| l.contains("M1 =")).collect();
    assert_eq!(lines.len(), 2, "{out}");
    assert!(lines.iter().all(|l| l.contains("isomorphic=true")), "{out}");
}

#[test]
fn universal_rejects_bad_matrix() {
    let q = scratch("bad.json", "[[[0,1],[2,0]]]");
    let (code, _, err) = tn(&["rho", "universal", "--queue", q.to_str().unwrap(), "--bound", "w*8"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn closure_laws_suite_passes() {
    let (code, out, _) = tn(&["suite", "closure-laws"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains(" 0 failed"), "{out}");
}

#[test]
fn oracle_equivalence_suite_passes() {
    let (code, out, _) = tn(&["suite", "oracle-equivalence"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn unknown_suite_is_an_error() {
    let (code, _, err) = tn(&["suite", "no-such-suite"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown suite"), "{err}");
}

#[test]
fn json_reports_carry_schema_and_config() {
    let v = json(&["rho", "closure", "--set", "2,5", "--p", "5", "--seed", "9"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "rho closure");
    assert_eq!(v["config"]["seed"], 9);
    assert!(v["waivers"].is_array());
    assert!(!v.to_string().contains('.'), "no floats expected: {v}");
}

#[test]
fn suite_json_is_byte_identical() {
    let args = ["suite", "symmetries", "--seed", "3", "--format", "json"];
    let a = tn(&args);
    let b = tn(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn csv_rows_are_key_value() {
    let (code, out, _) = tn(&["norm", "tsirelson", "--vector", "0:1", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut rows = out.lines();
    assert_eq!(rows.next(), Some("key,value"));
    assert!(rows.any(|r| r.starts_with("result")), "{out}");
}

#[test]
fn config_file_then_flags() {
    let cfg = scratch("cfg.json", r#"{"schedule": "m=2;n=3", "seed": 11}"#);
    let v = json(&["norm", "tsirelson", "--vector", "0:1,5:1,9:1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["result"]["value"], "3/2");
    assert_eq!(v["config"]["seed"], 11);
    let v = json(&["norm", "tsirelson", "--vector", "0:1,5:1,9:1", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(v["config"]["seed"], 4);
}

#[test]
fn config_rejects_unknown_fields() {
    let cfg = scratch("typo.json", r#"{"sched": "m=2;n=3"}"#);
    let (code, _, err) = tn(&["norm", "tsirelson", "--vector", "0:1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn tn_config_env_is_read() {
    let cfg = scratch("env.json", r#"{"schedule": "m=2;n=3"}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_tn"))
        .args(["norm", "tsirelson", "--vector", "0:1,5:1,9:1"])
        .env("TN_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "3/2");
}

#[test]
fn binary_exit_codes() {
    let bad = Command::new(env!("CARGO_BIN_EXE_tn")).args(["suite", "nope"]).env_remove("TN_CONFIG").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let help = Command::new(env!("CARGO_BIN_EXE_tn")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn strict_coding_errs_where_toy_waives() {
    let toy = json(&["special", "build", "--schedule", "toy:30", "--bound", "w^4", "--len", "2"]);
    assert!(toy["waivers"].as_array().unwrap().iter().any(|w| w == "start-weight"), "{toy}");
    let (code, _, err) =
        tn(&["special", "build", "--schedule", "toy:30", "--bound", "w^4", "--len", "2", "--coding", "strict"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn interfere_reports_fork_point() {
    let v = json(&[
        "special",
        "interfere",
        "--schedule",
        "toy:30",
        "--bound",
        "w^4",
        "--len",
        "3",
        "--fork-after",
        "1",
        "--fork-base",
        "w*5",
    ]);
    let r = &v["result"];
    assert_eq!(r["kappa"], 2, "{r}");
    assert_eq!(r["lambda"], 2, "{r}");
}

#[test]
fn oracle_depth_matches_the_norm() {
    let v = json(&["norm", "tsirelson", "--schedule", "m=2;n=3", "--vector", "0:1,5:1,9:1", "--oracle-depth", "2"]);
    assert_eq!(v["result"]["oracle"]["value"], "3/2", "{v}");
    assert_eq!(v["result"]["oracle"]["equal"], true);
    let (code, _, _) = tn(&["norm", "james", "--vector", "0:1", "--oracle-depth", "2"]);
    assert_eq!(code, 2);
}
