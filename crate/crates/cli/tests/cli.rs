use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_measure-sim"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn default_postulate_a_passes() {
    let out = run(&["postulate-a"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["check"], "postulate_a");
    assert_eq!(r["pass"], true);
}

#[test]
fn non_orthogonal_micro_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "neg.json",
        r#"{ "postulate_a": { "micro": { "dim": 2, "outcomes": [
            { "label": "1", "basis": [0] },
            { "label": "2", "vectors": [[[0.3, 0.0], [0.9539392014169456, 0.0]]] } ] } } }"#,
    );
    let out = run(&["postulate-a", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write(dir.path(), "a.json", "{ \"seed\": ");
    assert_eq!(run(&["postulate-a", "--config", &malformed]).status.code(), Some(2));
    let unknown = write(dir.path(), "b.json", r#"{ "postulate_a": { "trails": 3 } }"#);
    assert_eq!(run(&["postulate-a", "--config", &unknown]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["suite", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let incomplete = write(dir.path(), "c.json", r#"{ "collapse": { "first": [ { "label": "1", "basis": [0] } ] } }"#);
    assert_eq!(run(&["collapse", "--config", &incomplete]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn born_argument_validation() {
    assert_eq!(run(&["born", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["born", "--n-list", ""]).status.code(), Some(2));
    assert_eq!(run(&["born", "--n-list", "100,10"]).status.code(), Some(2));
    assert_eq!(run(&["born", "--eps", "0"]).status.code(), Some(2));
}

#[test]
fn born_writes_curve_and_first_n() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("born");
    let out = run(&[
        "born", "--p", "0.5", "--eps", "0.1", "--n-list", "10,100,1000,10000", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("born_convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,chi_exact,ln_chi_exact,bound");
    assert_eq!(lines.len(), 5);
    for l in &lines[1..] {
        let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[1] <= f[3]);
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("born_convergence.json")).unwrap()).unwrap();
    let first = &report["details"]["first_n_below"];
    assert_eq!(first[1]["threshold"], 1e-6);
    assert_eq!(first[1]["first_n"], 1000);
    assert!(out_dir.join("hoeffding_grid.json").exists());
    assert!(out_dir.join("summary.json").exists());
}

#[test]
fn born_with_certain_outcome_has_empty_tails() {
    let out = run(&["born", "--p", "1", "--eps", "0.1", "--n-list", "10,100,1000"]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["born", "--p", "1", "--eps", "0.1", "--n-list", "10,100,1000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("born_convergence.json")).unwrap()).unwrap();
    for row in report["details"]["rows"].as_array().unwrap() {
        assert_eq!(row["chi_exact"], 0.0);
    }
}

#[test]
fn collapse_default_weights() {
    let out = run(&["collapse", "--samples", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let weights = &r["details"]["parts"][0]["details"]["weights"];
    let got: Vec<f64> = weights.as_array().unwrap().iter().map(|w| w["ledger"].as_f64().unwrap()).collect();
    for (g, t) in got.iter().zip([0.5, 0.5, 0.0, 0.0]) {
        assert!((g - t).abs() < 1e-12);
    }
    let last = r["details"]["parts"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["check"], "sequential_frequency");
    assert_eq!(last["details"]["n_samples"], 20000);
}

#[test]
fn unwritable_output_exits_two() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let target = file.path().join("sub");
    let out = run(&["cross-validate", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_same_report() {
    let cfg = r#"{ "overlap": { "dims": [8, 32], "n_pairs": 500 } }"#;
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "o.json", cfg);
    let a = run(&["overlap", "--config", &path, "--seed", "9"]);
    let b = run(&["overlap", "--config", &path, "--seed", "9"]);
    let c = run(&["overlap", "--config", &path, "--seed", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}
