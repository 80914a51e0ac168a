//! End-to-end runs of the `filtered-spectra` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filtered-spectra"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env("FS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.display().to_string()
}

/// `s = 1 + 2 cos(2 theta)` goes negative.
fn corrupted_kernel() -> Value {
    json!({
        "type": "kernel",
        "breakpoints": ["0", "1"],
        "coeffs": [[0, 0, 0, 0, "1", "0"], [2, 0, 0, 0, "1", "0"], [-2, 0, 0, 0, "1", "0"]]
    })
}

fn semicircle_curve() -> Value {
    json!({"coeffs": [[0, 2, "1"], [1, 1, "-1"], [0, 0, "1"]]})
}

#[test]
fn moments_and_manifest() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["moments", "--kernel", "builtin:one", "--kmax", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&t.path().join("moments.csv"));
    let vals: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(vals, vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0]);

    let m = read_json(&t.path().join("manifest.json"));
    assert_eq!(m["command"], "moments");
    assert_eq!(m["config"]["kmax"], 8);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 1);
    let bytes = fs::read(t.path().join("moments.csv")).unwrap();
    assert_eq!(outputs[0]["file"], "moments.csv");
    assert_eq!(outputs[0]["sha256"], hex::encode(Sha256::digest(&bytes)));
    assert!(m["config_sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn exact_moments_for_compass_filter() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["moments", "--kernel", "builtin:compass", "--kmax", "4", "--exact"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&t.path().join("moments.csv"));
    let vals: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(vals, ["0", "1", "0", "3"]);
}

#[test]
fn oracle_matches_recursion() {
    let t1 = TempDir::new().unwrap();
    let t2 = TempDir::new().unwrap();
    assert_eq!(code(&bin(t1.path(), &["moments", "--kernel", "builtin:compass", "--kmax", "6"])), 0);
    assert_eq!(code(&bin(t2.path(), &["moments", "--kernel", "builtin:compass", "--kmax", "6", "--oracle"])), 0);
    let a = csv_rows(&t1.path().join("moments.csv"));
    let b = csv_rows(&t2.path().join("moments.csv"));
    for (x, y) in a.iter().zip(&b) {
        let (x, y): (f64, f64) = (x[1].parse().unwrap(), y[1].parse().unwrap());
        assert!((x - y).abs() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn solve_outside_and_inside_support() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["solve", "--kernel", "builtin:one", "--lambda", "3,0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(t.path().join("solve.csv")).unwrap();
    let want = (3.0 - 5f64.sqrt()) / 2.0;
    assert!(text.lines().skip(1).any(|l| l.split(',').any(|v| v.parse::<f64>().is_ok_and(|v| (v - want).abs() < 1e-12))), "{text}");

    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["solve", "--kernel", "builtin:one", "--lambda", "1,0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn density_of_semicircle() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["density", "--kernel", "builtin:one", "--xmin", "-1", "--xmax", "1", "--n", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&t.path().join("density.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let x: f64 = r[0].parse().unwrap();
        let f: f64 = r[1].parse().unwrap();
        let want = (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI);
        assert!((f - want).abs() < 1e-3, "f({x}) = {f}");
        assert_eq!(r[2], "0");
    }
    assert!(t.path().join("summary.json").exists());
}

#[test]
fn simulate_is_reproducible() {
    let run = || {
        let t = TempDir::new().unwrap();
        let o = bin(t.path(), &["--seed", "5", "simulate", "--filter", "builtin:compass", "--N", "120", "--trials", "3"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read_to_string(t.path().join("moments.csv")).unwrap(),
            fs::read_to_string(t.path().join("hist.csv")).unwrap(),
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let mass: f64 = a.1.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn eliminate_then_verify() {
    let t = TempDir::new().unwrap();
    // the relation file carries its kernel inline
    let rel = json!({
        "relation": filtered_spectra::algebra::compass_sf_relation().to_json()["relation"],
        "kernel": filtered_spectra::Filter::compass().to_json(),
    });
    let path = write(t.path(), "rel.json", &rel);
    let out = t.path().join("e");
    let o = bin(&out, &["eliminate", "--relation", &path]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let curve = read_json(&out.join("curve.json"));
    assert!(curve["residual"].as_f64().unwrap() < 1e-8);

    let cpath = write(t.path(), "curve.json", &json!({"coeffs": curve["coeffs"]}));
    let v = t.path().join("v");
    let o = bin(&v, &["verify", "--curve", &cpath, "--kernel", "builtin:compass"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(read_json(&v.join("verify.json"))["pass"], true);
}

#[test]
fn verify_flags_the_wrong_curve() {
    let t = TempDir::new().unwrap();
    let cpath = write(t.path(), "c.json", &semicircle_curve());
    let ok = bin(&t.path().join("a"), &["verify", "--curve", &cpath, "--kernel", "builtin:one"]);
    assert_eq!(code(&ok), 0);
    let bad = bin(&t.path().join("b"), &["verify", "--curve", &cpath, "--kernel", "builtin:compass"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(read_json(&t.path().join("b/verify.json"))["pass"], false);
}

#[test]
fn eliminate_without_kernel_is_an_error() {
    let t = TempDir::new().unwrap();
    let path = write(t.path(), "rel.json", &filtered_spectra::algebra::compass_sf_relation().to_json());
    let o = bin(&t.path().join("o"), &["eliminate", "--relation", &path]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel"));
}

#[test]
fn crosscheck_compass_filter_passes() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["crosscheck", "--kernel", "builtin:compass", "--N", "600", "--grid", "401", "--kmax", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = read_json(&t.path().join("report.json"));
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["rows"].as_array().unwrap().len(), 4);
    let m = read_json(&t.path().join("manifest.json"));
    assert_eq!(m["config"]["model"], "filtered");
}

#[test]
fn crosscheck_constant_kernel_passes() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["crosscheck", "--kernel", "builtin:one", "--grid", "401", "--kmax", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(read_json(&t.path().join("manifest.json"))["config"]["model"], "colored");
}

#[test]
fn crosscheck_flags_a_corrupted_kernel() {
    let t = TempDir::new().unwrap();
    let k = write(t.path(), "bad.json", &corrupted_kernel());
    let out = t.path().join("o");
    let o = bin(&out, &["crosscheck", "--kernel", &k, "--filter", "builtin:compass", "--N", "300", "--kmax", "4"]);
    assert_eq!(code(&o), 1);
    let rep = read_json(&out.join("report.json"));
    assert_eq!(rep["pass"], false);
    assert!(!rep["kernel_validation_failures"].as_array().unwrap().is_empty());
    let rows = rep["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["simulation_ok"] == false));
    assert!(rows.iter().all(|r| r["density_ok"] == false));
}

#[test]
fn walkcheck_passes() {
    let t = TempDir::new().unwrap();
    let o = bin(t.path(), &["walkcheck", "--z", "0.1,0.05;0.2,0;0.1,-0.05", "--t-max", "80"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&t.path().join("walkcheck.json"))["pass"], true);
}

#[test]
fn config_file_supplies_options() {
    let t = TempDir::new().unwrap();
    let cfg = write(t.path(), "cfg.json", &json!({"kernel": "builtin:one", "kmax": 4}));
    let out = t.path().join("o");
    let o = Command::new(env!("CARGO_BIN_EXE_filtered-spectra"))
        .args(["--config", &cfg, "--out"])
        .arg(&out)
        .args(["moments", "--kmax", "6"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // the flag overrides the file
    assert_eq!(csv_rows(&out.join("moments.csv")).len(), 6);
}

#[test]
fn missing_kernel_and_bad_input_exit_2() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&bin(t.path(), &["moments"])), 2);
    assert_eq!(code(&bin(t.path(), &["moments", "--kernel", "builtin:nope"])), 2);
    assert_eq!(code(&bin(t.path(), &["solve", "--kernel", "builtin:one", "--lambda", "abc"])), 2);
    assert_eq!(code(&bin(t.path(), &["frobnicate"])), 2);
}

#[test]
fn in_process_entry_point() {
    let t = TempDir::new().unwrap();
    let out = t.path().display().to_string();
    let c = filtered_spectra::cli::run(["filtered-spectra", "--out", &out, "moments", "--kernel", "builtin:one", "--kmax", "2"]);
    assert_eq!(c, 0);
    assert!(t.path().join("manifest.json").exists());
}
