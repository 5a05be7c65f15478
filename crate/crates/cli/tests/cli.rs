use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modframe"))
        .args(args)
        .env_remove("MODFRAME_TOL")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr record");
    serde_json::from_str(line).expect("stderr record is JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn analyze_orthonormal_basis() {
    let out = run(&["analyze", &fixture("orthonormal_frame.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verified"], true);
    assert!((f(&v["lower_bound"]) - 1.0).abs() < 1e-12);
    assert!((f(&v["upper_bound"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["is_normalized_tight"], true);
}

#[test]
fn analyze_non_generating_sequence_fails_verification() {
    let out = run(&["analyze", &fixture("deficient_frame.json")]);
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"], "VerificationFailed");
    assert_eq!(json_of(&out)["is_frame"], false);
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["analyze", "/nonexistent/frame.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"], "FileNotFound");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"module\": 3}").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"], "ParseError");

    std::fs::write(
        &path,
        "{\"d\": 2, \"b\": [{\"rows\": 2, \"cols\": 2, \"data\": [[1, 0]]}]}",
    )
    .unwrap();
    let out = run(&["resolution", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"], "ParseError");
}

#[test]
fn non_positive_tolerance_is_rejected() {
    for tol in ["0", "-1e-9", "nan"] {
        let out = run(&["--tol", tol, "analyze", &fixture("orthonormal_frame.json")]);
        assert_eq!(out.status.code(), Some(1), "tol {tol}");
    }
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_modframe"))
        .args(["resolution", &fixture("projections_resolution.json")])
        .env("MODFRAME_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((f(&v["tol"]) - 3e-6).abs() < 1e-18);
}

#[test]
fn dual_reconstructs() {
    let out = run(&["dual", &fixture("mercedes_frame.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!(f(&v["reconstruction_residual"]) < 1e-12);
    assert!(f(&v["involution_residual"]) < 1e-12);
    // a normalized tight frame is its own canonical dual
    let original: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("mercedes_frame.json")).unwrap())
            .unwrap();
    let a = &original["elements"][1]["coords"][1]["blocks"][0][0][0];
    let b = &v["dual"]["elements"][1]["coords"][1]["blocks"][0][0][0];
    assert!((f(a) - f(b)).abs() < 1e-12);
}

#[test]
fn resolution_polar_factors_of_projections() {
    let out = run(&["resolution", &fixture("projections_resolution.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verified"], true);
    let input: Value = serde_json::from_str(
        &std::fs::read_to_string(fixture("projections_resolution.json")).unwrap(),
    )
    .unwrap();
    for (i, factor) in v["polar"]["factors"].as_array().unwrap().iter().enumerate() {
        let b = input["b"][i]["data"].as_array().unwrap();
        for part in ["u", "m"] {
            let data = factor[part]["data"].as_array().unwrap();
            for (x, y) in data.iter().zip(b) {
                assert!((f(&x[0]) - f(&y[0])).abs() < 1e-12);
                assert!((f(&x[1]) - f(&y[1])).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn broken_resolution_fails_verification() {
    let out = run(&["resolution", &fixture("broken_resolution.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"], "VerificationFailed");
    let v = json_of(&out);
    assert!((f(&v["verification"]["sum_residual"]) - 1.0).abs() < 1e-12);
}

#[test]
fn diagonal_example_at_zero_phase() {
    let out = run(&["example56", "--phi", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(f(&v["distance"]), 1.0);
    assert_eq!(v["within_limit"], true);
}

#[test]
fn diagonal_example_negative_phase() {
    let out = run(&["example56", "--phi", "-2.0"]);
    assert_eq!(out.status.code(), Some(0));
    let d = f(&json_of(&out)["distance"]);
    assert!((d - 4.0 * 1f64.sin()).abs() < 1e-12);
}

#[test]
fn diagonal_example_sweep_csv() {
    let out = run(&[
        "example56",
        "--sweep",
        "7",
        "--from",
        "0",
        "--to",
        "3.141592653589793",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,distance"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 7);
    for (phi, d) in rows {
        assert!((d - 1f64.max(4.0 * (phi / 2.0).sin().abs())).abs() < 1e-12);
    }
}

#[test]
fn tighten_scan_is_minimized_at_lambda() {
    let out = run(&[
        "tighten",
        &fixture("diagonal_hilbert_frame.json"),
        "--scan-points",
        "201",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let lambda = f(&v["multiple"]["lambda"]);
    assert!((lambda - 2.0).abs() < 1e-12);
    assert!((f(&v["multiple"]["distance"]) - 1.0).abs() < 1e-12);
    let curve = v["curve"].as_array().unwrap();
    assert_eq!(curve.len(), 201);
    let best = curve
        .iter()
        .map(|p| f(&p["distance"]))
        .fold(f64::INFINITY, f64::min);
    assert!((best - 1.0).abs() < 1e-12);
    assert!(f(&v["symmetric"]["tightness_defect"]) < 1e-10);
}

#[test]
fn distance_and_balan() {
    let x = fixture("diagonal_hilbert_frame.json");
    let out = run(&["distance", &x, &fixture("tight_hilbert_frame.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["near"], true);
    assert_eq!(v["similar"], true);
    // (T_x - T_y) T_y^+ = diag(-1/2, 1/2, 0, 0) and (T_y - T_x) T_x^+ = diag(1, -1/3, 0, 0)
    assert!((f(&v["c_xy"]) - 1.0).abs() < 1e-12);
    assert!((f(&v["c_yx"]) - 0.5).abs() < 1e-12);

    let out = run(&["balan", &x]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((f(&v["min_c"]) - 0.5).abs() < 1e-12);
    assert!((f(&v["min_d"]) - 3f64.ln() / 2.0).abs() < 1e-12);
    assert!((f(&v["geometric"]["factor"]) - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn invariant_detects_reordered_unitary_image() {
    let f0 = fixture("skewed_frame.json");
    let f1 = fixture("skewed_rotated.json");
    let out = run(&["invariant", &f0, &f1]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["isomorphic"], false);

    let out = run(&["invariant", &f0, &f1, "--permute"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["isomorphic"], true);
    assert_eq!(v["permutation"], serde_json::json!([1, 2, 0]));
    assert!(f(&v["mapping_residual"]) < 1e-10);
}

#[test]
fn modcheck_similarity() {
    let out = run(&[
        "modcheck",
        &fixture("mercedes_frame.json"),
        "--against",
        &fixture("mercedes_rotated.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["similarity"]["relation"], "unitarily_equivalent");
    assert_eq!(v["riesz"]["is_riesz_basis"], false);
    assert_eq!(v["riesz"]["kernel_dimension"], 1);

    let out = run(&["modcheck", &fixture("orthonormal_frame.json")]);
    let v = json_of(&out);
    assert_eq!(v["riesz"]["is_orthogonal_hilbert_basis"], true);

    let out = run(&[
        "modcheck",
        &fixture("skewed_frame.json"),
        "--against",
        &fixture("skewed_rotated.json"),
    ]);
    assert_eq!(json_of(&out)["similarity"]["relation"], "neither");
    assert_eq!(json_of(&out)["similarity"]["witness_residual"], "inf");
}

#[test]
fn same_seed_same_bytes() {
    let args = ["--seed", "42", "dual", &fixture("mercedes_frame.json")];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let args = [
        "--seed",
        "7",
        "resolution",
        &fixture("projections_resolution.json"),
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = run(&[
        "example56",
        "--phi",
        "0.3",
        "--format",
        "text",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("verified = true"));
    assert!(text.contains("distance = 1.0000000000000000e0"));
}

#[test]
fn text_reports_name_their_theorem() {
    let fx = fixture("mercedes_frame.json");
    let hx = fixture("diagonal_hilbert_frame.json");
    let hy = fixture("tight_hilbert_frame.json");
    let rx = fixture("projections_resolution.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", &fx],
        vec!["dual", &fx],
        vec!["modcheck", &fx],
        vec!["invariant", &fx],
        vec!["tighten", &hx],
        vec!["distance", &hx, &hy],
        vec!["balan", &hx],
        vec!["resolution", &rx],
        vec!["example56"],
        vec!["diagonal-example"],
    ];
    for mut args in cases {
        args.extend(["--format", "text"]);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.len() > 20, "{args:?}: {first}");
        assert_eq!(text.lines().nth(1), Some("verified = true"));
    }
}
