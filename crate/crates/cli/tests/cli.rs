//! End-to-end checks of the `edgeh2` binary: exit codes, output formats,
//! and reproducibility.

use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_edgeh2");

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn h2_tree_fixture_value() {
    let out = run(&["h2", &fixture("tri_tree1.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("total_sq:       1.833333"), "{text}");
}

#[test]
fn h2_oracle_deviation_small() {
    let out = run(&["h2", &fixture("tri.txt"), "--model", "full", "--oracle", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["oracle_deviation"].as_f64().unwrap() <= 1e-8);
    assert!((v["total_sq"].as_f64().unwrap() - 157.0 / 66.0).abs() <= 1e-9);
}

#[test]
fn disconnected_graph_exits_2() {
    let out = run(&["h2", &fixture("disconnected.txt")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_exits_1_with_line_number() {
    let dir = std::env::temp_dir();
    let path = dir.join("edgeh2_bad_fixture.txt");
    std::fs::write(&path, "node 1 1.0\nedge 1 2 1.0\n").unwrap();
    let out = run(&["h2", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn bad_tree_argument_exits_3() {
    let out = run(&["h2", &fixture("tri.txt"), "--tree", "1,2;2,4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_and_json_agree_to_full_precision() {
    let file = fixture("tri.txt");
    let csv = stdout(&run(&["h2", &file, "--model", "full", "--format", "csv"]));
    let json = stdout(&run(&["h2", &file, "--model", "full", "--format", "json"]));
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    // shortest round-trip printing makes the two formats byte-identical
    assert_eq!(row[2], v["total_sq"].as_f64().unwrap().to_string());
    assert_eq!(row[3], v["weight_term"].as_f64().unwrap().to_string());
    assert_eq!(row[4], v["timescale_term"].as_f64().unwrap().to_string());
}

#[test]
fn mst_brute_force_cross_check() {
    let out = run(&["mst", &fixture("tri.txt"), "--brute-force"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("total_sq:       1.833333"), "{text}");
    assert!(text.contains("brute_force_value: 1.833333"), "{text}");
}

#[test]
fn plan_ranks_path_chords() {
    let out = run(&[
        "plan",
        &fixture("p6.txt"),
        "--candidates",
        "3,6,5;2,3,10",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ranked = v["ranked"].as_array().unwrap();
    // the heavier chord closes the shorter cycle and must rank first
    assert_eq!(ranked[0]["u"], 2);
    assert_eq!(ranked[0]["v"], 3);
    assert!((ranked[0]["delta_tree_model"].as_f64().unwrap() + 2.0 / 4.2).abs() <= 1e-9);
    assert!((ranked[1]["delta_tree_model"].as_f64().unwrap() + 3.0 / 6.4).abs() <= 1e-9);
}

#[test]
fn verify_battery_passes_on_fixture() {
    let out = run(&["verify", &fixture("tri.txt"), "--trials", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0 failed"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn simulate_is_reproducible_and_close() {
    let args = [
        "simulate",
        &fixture("k2.txt"),
        "--trials",
        "10",
        "--steps",
        "20000",
        "--burn-in",
        "2000",
        "--seed",
        "7",
        "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert!((v["total_sq"].as_f64().unwrap() - 1.5).abs() < 0.25);
}
