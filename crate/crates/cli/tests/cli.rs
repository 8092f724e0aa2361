use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leafscope")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn new_spec(dir: &TempDir, n: usize) -> PathBuf {
    let path = dir.path().join(format!("spec{n}.json"));
    let out = run(&[
        "curve", "new", "--tau-re", "0.1", "--tau-im", "1", "--n", &n.to_string(), "--l-sum-re", "0.2",
        "--l-sum-im", "0.3", "--out", path_str(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn build_cache(dir: &TempDir, spec: &Path, name: &str, seed: &str) -> PathBuf {
    let path = dir.path().join(name);
    let out = run(&["poisson", "build", "--spec", path_str(spec), "--out", path_str(&path), "--seed", seed]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn new_then_show_reproduces_the_curve() {
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 4);
    let shown = json(&run(&["curve", "show", "--spec", path_str(&spec), "--json"]));
    assert_eq!(shown["n"], 4);
    assert_eq!(shown["tau"], serde_json::json!([0.1, 1.0]));
    assert_eq!(shown["omega"].as_array().unwrap().len(), 4);
    let families = shown["families"].as_array().unwrap();
    assert_eq!(families.iter().filter(|f| f["family"]["family"] == "Omega").count(), 4);

    let text = run(&["curve", "show", "--spec", path_str(&spec)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("E_w"));
}

#[test]
fn bad_curves_exit_2() {
    assert_eq!(code(&run(&["curve", "new", "--tau-im", "-1", "--n", "4"])), 2);
    assert_eq!(code(&run(&["curve", "new", "--tau-im", "1", "--n", "2"])), 2);
    assert_eq!(code(&run(&["curve", "show", "--spec", "/nonexistent/spec.json"])), 2);
}

#[test]
fn odd_curve_lists_the_top_leaf() {
    let out = json(&run(&["curve", "new", "--tau-im", "1", "--n", "5"]));
    assert_eq!(out["n"], 5);
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 5);
    let shown = json(&run(&["curve", "show", "--spec", path_str(&spec), "--json"]));
    let families = shown["families"].as_array().unwrap();
    assert_eq!(families.len(), 3);
    assert_eq!(families[2]["leaf_dim"], 4);
}

#[test]
fn builds_are_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 5);
    let a: Value = serde_json::from_str(&std::fs::read_to_string(build_cache(&dir, &spec, "a.json", "7")).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(build_cache(&dir, &spec, "b.json", "7")).unwrap()).unwrap();
    assert_eq!(a["omega_matrix"], b["omega_matrix"]);
    assert_eq!(a["probes"], b["probes"]);
    assert_eq!(a["theta_convention"], b["theta_convention"]);
}

#[test]
fn classify_constructed_points() {
    let dir = TempDir::new().unwrap();
    let spec4 = new_spec(&dir, 4);
    let cache4 = build_cache(&dir, &spec4, "c4.json", "1");
    let args = |desc: &str| {
        let out = run(&[
            "classify", "--spec", path_str(&spec4), "--cache", path_str(&cache4), "--sample-leaf", desc, "--json",
        ]);
        assert_eq!(code(&out), 0, "{desc}: {}", String::from_utf8_lossy(&out.stderr));
        json(&out)
    };
    let point = args("point:0.3,0.2");
    assert_eq!(point["bundle"]["variant"], "DecomposableSum");
    assert_eq!(point["bundle"]["d"], 1);
    assert_eq!(point["poisson_rank"]["Exact"], 0);

    let vertex = args("split-omega:0");
    assert_eq!(vertex["secant_count"], "Pencil");
    assert_eq!(vertex["poisson_rank"]["Exact"], 0);
    assert_eq!(vertex["agree"], true);

    let omega = args("omega:3");
    assert_eq!(omega["bundle"]["variant"], "IndecomposableOmega");
    assert_eq!(omega["secant_count"], "Unique");

    let spec5 = new_spec(&dir, 5);
    let out = run(&["classify", "--spec", path_str(&spec5), "--point", "1,0.5;-0.3,2;0.7,-1;0.2,0.1;-1.5,0.4", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["bundle"]["variant"], "IndecomposableOdd");
}

#[test]
fn points_near_the_curve_are_ambiguous() {
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 5);
    let on = json(&run(&["classify", "--spec", path_str(&spec), "--sample-leaf", "point:0.41,0.27", "--json"]));
    let coords: Vec<(f64, f64)> = on["point"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .collect();
    // A chordal offset of about 1e-5 sits between the on-curve and off-curve thresholds.
    let shifted: Vec<String> = coords
        .iter()
        .enumerate()
        .map(|(i, (re, im))| format!("{},{}", re + if i == 0 { 1e-5 } else { 0.0 }, im - if i == 3 { 1e-5 } else { 0.0 }))
        .collect();
    let out = run(&["classify", "--spec", path_str(&spec), "--point", &shifted.join(";")]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stderr).contains("candidates"));
}

#[test]
fn malformed_points_exit_2() {
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 4);
    for point in ["1,0;0,1", "1,0;0,1;x,0;0,0", "0,0;0,0;0,0;0,0"] {
        assert_eq!(code(&run(&["classify", "--spec", path_str(&spec), "--point", point])), 2, "{point}");
    }
    assert_eq!(code(&run(&["classify", "--spec", path_str(&spec), "--sample-leaf", "odd"])), 2);
    assert_eq!(code(&run(&["classify", "--spec", path_str(&spec), "--sample-leaf", "omega:9"])), 2);
}

#[test]
fn quick_verification_passes_and_writes_a_report() {
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 4);
    let cache = build_cache(&dir, &spec, "c.json", "3");
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify", "--spec", path_str(&spec), "--cache", path_str(&cache), "--level", "quick", "--report",
        path_str(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["level"], "quick");
    for check in r["checks"].as_array().unwrap() {
        for key in ["name", "status", "residual", "tolerance", "samples", "seconds"] {
            assert!(check.get(key).is_some(), "{key} missing");
        }
    }
    assert!(r["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn corrupted_cache_fails_verification_with_a_report() {
    let dir = TempDir::new().unwrap();
    let spec = new_spec(&dir, 4);
    let cache = build_cache(&dir, &spec, "c.json", "3");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cache).unwrap()).unwrap();
    let first = &mut v["probes"][0]["bracket"][0][0];
    *first = Value::from(first.as_f64().unwrap() + 1.0);
    std::fs::write(&cache, v.to_string()).unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify", "--spec", path_str(&spec), "--cache", path_str(&cache), "--report", path_str(&report),
    ]);
    assert_eq!(code(&out), 5);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], false);
    assert_eq!(r["checks"][0]["status"], "fail");
}

#[test]
fn thread_variable_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_leafscope"))
        .args(["curve", "new", "--tau-im", "1", "--n", "4"])
        .env("LEAFSCOPE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_leafscope"))
        .args(["curve", "new", "--tau-im", "1", "--n", "4"])
        .env("LEAFSCOPE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}
