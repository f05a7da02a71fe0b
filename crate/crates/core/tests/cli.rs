//! End-to-end behavior of the `check` binary: exit codes, report schema,
//! expected-negative handling.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_check")
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(name)
}

#[test]
fn e1_all_suites_pass() {
    let out = Command::new(exe())
        .args(["--scenario", &fixture("E1"), "--suite", "all"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("all checks passed"));
    assert!(!text.contains("FAIL "));
}

#[test]
fn e5_torsion_expected_negative_passes() {
    let out = Command::new(exe())
        .args(["--scenario", &fixture("E5"), "--suite", "torsion"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "expected-negative run must exit 0"
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[expect nonzero]"));
}

#[test]
fn e3_sck_json_schema() {
    let json_path = tmp("pn_tangent_cli_e3.json");
    let out = Command::new(exe())
        .args([
            "--scenario",
            &fixture("E3"),
            "--suite",
            "sck",
            "--quiet",
            "--json",
        ])
        .arg(&json_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "--quiet suppresses the text report");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["scenario"], "E3-benenti-flat");
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["passed"], true);
    let checks = doc["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c["id"].is_string());
        assert!(c["anchor"].is_string());
        assert!(c["residual"].is_number());
        assert!(c["tol"].is_number());
        let verdict = c["verdict"].as_str().unwrap();
        assert!(["pass", "fail", "not-applicable"].contains(&verdict));
        assert!(c["worst_point"]["q"].is_array());
        assert!(c["worst_point"]["u"].is_array());
    }
}

#[test]
fn usage_error_exits_2() {
    let out = Command::new(exe())
        .args(["--no-such-flag"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(exe())
        .args(["--scenario", &fixture("E1"), "--suite", "bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn load_error_exits_3() {
    let out = Command::new(exe())
        .args(["--scenario", "/nonexistent/nowhere.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let bad = tmp("pn_tangent_bad_scenario.json");
    std::fs::write(
        &bad,
        r#"{"name":"bad","dim":2,"mode":"riemannian","J":[["1"]]}"#,
    )
    .unwrap();
    let out = Command::new(exe())
        .args(["--scenario"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn numeric_error_exits_4() {
    // loads and samples fine (metric is flat), but J divides by zero at
    // every evaluation, which surfaces while running a suite
    let bad = tmp("pn_tangent_numeric_error.json");
    std::fs::write(
        &bad,
        r#"{"name":"numeric-error","dim":2,"mode":"riemannian",
            "metric":[["1","0"],["0","1"]],
            "J":[["1/(q1 - q1)","0"],["0","1"]],
            "sampling":{"count":3,"seed":1}}"#,
    )
    .unwrap();
    let out = Command::new(exe())
        .args(["--scenario"])
        .arg(&bad)
        .args(["--suite", "lifts"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("lifts."),
        "error names the offending check: {err}"
    );
}

#[test]
fn failing_check_exits_1() {
    // E5 without its expect block: the torsion checks genuinely fail
    let doc = r#"{"name":"E5-stripped","dim":2,"mode":"riemannian",
        "metric":[["1","0"],["0","1"]],
        "J":[["q2","0"],["0","0"]],
        "sampling":{"count":20,"seed":42}}"#;
    let path = tmp("pn_tangent_e5_stripped.json");
    std::fs::write(&path, doc).unwrap();
    let out = Command::new(exe())
        .args(["--scenario"])
        .arg(&path)
        .args(["--suite", "torsion"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL"));
}

#[test]
fn point_and_seed_overrides() {
    let json_a = tmp("pn_tangent_seed_a.json");
    let json_b = tmp("pn_tangent_seed_b.json");
    for (seed, path) in [("1", &json_a), ("2", &json_b)] {
        let out = Command::new(exe())
            .args([
                "--scenario",
                &fixture("E1"),
                "--suite",
                "connection",
                "--points",
                "5",
                "--seed",
                seed,
                "--quiet",
                "--json",
            ])
            .arg(path)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_a).unwrap()).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_b).unwrap()).unwrap();
    assert_eq!(a["seed"], 1);
    assert_eq!(b["seed"], 2);
}
