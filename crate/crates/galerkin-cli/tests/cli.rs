use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galerkin")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn acim_lanford_resolves_quickly() {
    let v = json(&["acim", "lanford"]);
    assert!(v["solve"]["order"].as_u64().unwrap() <= 40);
    assert!((v["integral"].as_f64().unwrap() - 1.0).abs() < 1e-13);
}

#[test]
fn lyapunov_of_doubling() {
    let v = json(&["lyapunov", "doubling"]);
    assert!((v["lyapunov"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-13);
}

#[test]
fn diffusion_adaptive_matches_fixed_order() {
    let a = json(&["diffusion", "lanford", "--obs", "x^2"])["diffusion"].as_f64().unwrap();
    let b = json(&["diffusion", "lanford", "--obs", "x^2", "--order", "64"])["diffusion"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    assert!(a > 0.0);
}

#[test]
fn resolvent_of_doubling_cosine_is_itself() {
    // L kills cos 2πx for the doubling map, so Σ Lⁿφ = φ
    let v = json(&["resolvent", "doubling", "--obs", "cos(2*pi*x)"]);
    let c: Vec<f64> = v["coefficients"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((c[1] - 1.0).abs() < 1e-13, "{c:?}");
    assert!(c.iter().enumerate().filter(|(i, _)| *i != 1).all(|(_, x)| x.abs() < 1e-13), "{c:?}");
    assert_eq!(code(&["resolvent", "doubling", "--obs", "1 + cos(2*pi*x)"]), 2);
}

#[test]
fn bounds_csv_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&["bounds", "lanford", "--block", "64", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(v["violation_count"], 0);
    let csv = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,k,entry,bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 64 * 64);
    assert!(rows.iter().all(|r| r[2].abs() <= r[3] * (1.0 + 1e-10)));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn convergence_errors_decrease() {
    let dir = tempfile::tempdir().unwrap();
    json(&["convergence", "lanford", "--orders", "6,10,14", "--out", dir.path().to_str().unwrap()]);
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("order,linf_error,bv_error,seconds"));
    let errs: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn validate_lanford_certificate() {
    let v = json(&["validate", "lanford", "--order", "192", "--bsol", "9235", "--lyapunov"]);
    let c = &v["certificate"];
    assert!(c["gate"].as_f64().unwrap() < 1e-5);
    assert_eq!(c["dominated_by"], "truncation");
    assert_eq!(c["coefficients"].as_array().unwrap().len(), 192);
    let q = &v["quantities"]["lyapunov"];
    assert!(q["lo"].as_f64().unwrap() < q["hi"].as_f64().unwrap());
}

#[test]
fn validate_refusals() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sampled.map");
    std::fs::write(
        &path,
        "domain interval 0 1\nbranch [0, 1/2] expr 2*x + 0.05*sin(2*pi*x)\nbranch [1/2, 1] expr 2*x - 1 + 0.05*sin(2*pi*x)\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    // the map itself is fine for the floating-point solver
    json(&["acim", "--map-file", p]);
    assert_eq!(code(&["validate", "--map-file", p, "--order", "128"]), 2);
    assert_eq!(code(&["validate", "lanford", "--order", "32"]), 3);
    assert_eq!(code(&["validate", "lanford", "--order", "192", "--precision", "quad"]), 2);
    assert_eq!(code(&["validate", "doubling", "--order", "16"]), 2);
}

#[test]
fn deterministic_output_is_reproducible() {
    let a = run(&["--deterministic", "acim", "lanford"]);
    let b = run(&["acim", "lanford", "--deterministic"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains("seconds") && !text.contains("timings"));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(code(&["acim", "lanford", "--tol", "0.5"]), 2);
    assert_eq!(code(&["acim", "no-such-map"]), 2);
    assert_eq!(code(&["diffusion", "lanford", "--obs", "x^"]), 2);
    assert_eq!(code(&["acim"]), 2);
    assert_eq!(code(&["acim", "--map-file", "/nonexistent/file"]), 2);
}
