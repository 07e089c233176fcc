use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn engelset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_engelset"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .env_remove("ENGELSET_MAX_POINTS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&engelset(args))).unwrap()
}

#[test]
fn tables_match_golden_files() {
    let planar = stdout(&engelset(&["reproduce-table", "planar"]));
    assert_eq!(planar, include_str!("../../../data/golden/planar_table.csv"));
    let spatial = stdout(&engelset(&["reproduce-table", "spatial"]));
    assert_eq!(spatial, include_str!("../../../data/golden/spatial_table.csv"));
}

#[test]
fn generate_empty_range_and_file_output() {
    let empty = stdout(&engelset(&["generate", "--example", "spatial", "--layers", "1", "0"]));
    assert_eq!(empty.lines().count(), 1);
    assert!(empty.starts_with("layer,"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let args = ["generate", "--example", "planar", "--layers", "-1", "1", "--lattice-radius", "2"];
    let printed = stdout(&engelset(&args));
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    stdout(&engelset(&with_out));
    assert_eq!(fs::read_to_string(&path).unwrap(), printed);
    assert_eq!(printed.lines().count(), 1 + 3 * 5);
}

#[test]
fn counts() {
    assert_eq!(json(&["count", "--example", "planar", "--rho", "48"])["N"], 1);
    assert_eq!(json(&["count", "--example", "planar", "--rho", "1"])["N"], 1);
    assert!(json(&["count", "--example", "spatial", "--rho", "54"])["N"].as_u64().unwrap() >= 2);
    assert_eq!(json(&["count", "--example", "planar", "--rho-sq", "2704"])["N"], 2);
    assert_eq!(json(&["count", "--example", "planar", "--rho", "2dR-eps", "--eps", "4"])["N"], 1);
}

#[test]
fn parameter_file_matches_builtin_example() {
    let a = stdout(&engelset(&["count", "--params", "data/spatial.json", "--rho", "40"]));
    let b = stdout(&engelset(&["count", "--example", "spatial", "--rho", "40"]));
    assert_eq!(a, b);
}

#[test]
fn groups() {
    let g = json(&["group", "--example", "spatial", "--rho", "18"]);
    assert_eq!(g["order"], 2);
    assert_eq!(g["elements"][1][0][0], "-1");
    assert_eq!(json(&["group", "--example", "spatial", "--rho", "36"])["order"], 1);
    let k = json(&["group", "--example", "spatial", "--k", "1"]);
    assert_eq!(k["order"], k["prediction"]["predicted_order"]);
}

#[test]
fn regularity_and_parameters() {
    let r = json(&["regularity", "--example", "spatial", "--eps", "14"]);
    assert_eq!(r["regularity"]["is_regular"], false);
    assert_eq!(r["enreg"]["consistent"], true);
    assert_eq!(r["hypothesis"]["all_hold"], true);

    let c = json(&["choose-params", "--d", "2", "--big-r-sq", "169", "--eps", "4"]);
    assert_eq!(c["hypothesis"]["strict_holds"], true);
    assert_ne!(c["chosen"]["a"], "5");
    assert_eq!(c["regularity"]["tau"], 1);
}

#[test]
fn delone_and_line_sets() {
    let v = json(&["verify-delone", "--example", "planar", "--samples", "200"]);
    assert_eq!(v["holds"], true);
    assert_eq!(v["packing"]["min_sq"], "100");
    assert_eq!(v["covering"]["sharp_sq"], "169");

    let l = json(&["onedim", "counterexample", "--rho", "1", "--big-r", "1"]);
    assert_eq!(l["checks"][0]["clusters_equal"], true);
    assert_eq!(l["checks"][1]["clusters_equal"], false);
    let ab = json(&["onedim", "ab", "--a", "1", "--b", "2"]);
    assert_eq!(ab["checks"][0]["clusters_equal"], true);
}

#[test]
fn svg_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.svg");
    let args = ["svg", "--example", "planar", "--rho", "48", "--rho", "52", "--out", path.to_str().unwrap()];
    stdout(&engelset(&args));
    let first = fs::read_to_string(&path).unwrap();
    stdout(&engelset(&args));
    assert_eq!(first, fs::read_to_string(&path).unwrap());
    assert_eq!(first.matches(r#"class="ball""#).count(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"d": 2, "abs_pattern": [1], "period": 1, "signs": [1], "a": "5", "b": "4", "delta": "1"}"#).unwrap();
    let out = engelset(&["count", "--params", bad.to_str().unwrap(), "--rho", "10"]);
    assert_eq!(out.status.code(), Some(2));

    let out = engelset(&["count", "--example", "planar", "--rho", "2dR-eps"]);
    assert_eq!(out.status.code(), Some(2));
    let out = engelset(&["count", "--example", "planar"]);
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_engelset"))
        .args(["count", "--example", "spatial", "--rho", "54"])
        .env("ENGELSET_MAX_POINTS", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = engelset(&["svg", "--params", "data/spatial.json", "--layers", "0", "0", "--lattice-radius", "1"]);
    assert!(out.status.success());
}
