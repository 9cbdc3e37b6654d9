use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use t2m_cli::ScenarioConfig;
use tempfile::TempDir;

fn t2m(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_t2m")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v.clone()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

const SPHERE: &str = r#"{
    "model": {"kind": "sphere", "radius": 1.0},
    "initial": {"x": [1.5707963267948966, 0.0], "y": [0.0, 1.0], "w": [0.0, 0.0], "w_dot": [1.0, 0.0]},
    "integrator": {"dt": 0.001, "t_end": 1.5707963267948966}
}"#;

const DRAG: &str = r#"{
    "model": {"kind": "minkowski_norm", "n": 2},
    "force": {"kind": "linear_drag", "k": 1.0},
    "initial": {"x": [0.0, 0.0], "y": [1.0, 0.0], "w": [0.0, 0.0], "w_dot": [1.0, 0.0]},
    "integrator": {"dt": 0.001, "t_end": 1.0}
}"#;

#[test]
fn coeffs_euclidean_is_flat() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "e.json", r#"{"model": {"kind": "euclidean", "n": 2}}"#);
    let doc = stdout_json(&t2m(&["coeffs", "--config", cfg.to_str().unwrap(), "--at", "x=0.3,-1;y=0.5,2;y2=1,1"]));
    assert_eq!(matrix(&doc["g"]), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let keys = ["G", "N", "L_berwald", "R_tor", "M1_ours", "M2_ours", "M1_miron", "M2_miron"];
    for key in keys {
        let flat: Vec<f64> = doc[key].to_string().replace(['[', ']'], " ").split(',').map(|s| s.trim().parse().unwrap()).collect();
        assert!(flat.iter().all(|v| *v == 0.0), "{key}: {flat:?}");
    }
    assert_eq!(doc.as_object().unwrap().len(), 9);
}

#[test]
fn coeffs_drag_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "d.json", DRAG);
    let doc = stdout_json(&t2m(&["coeffs", "--config", cfg.to_str().unwrap()]));
    assert_eq!(matrix(&doc["M1_ours"]), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
    assert_eq!(matrix(&doc["M2_ours"]), vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
}

#[test]
fn coeffs_sphere_connection() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", SPHERE);
    let doc = stdout_json(&t2m(&["coeffs", "--config", cfg.to_str().unwrap(), "--at", "x=0.7853981633974483,0;y=0,1;y2=0.25,0"]));
    let n = matrix(&doc["N"]);
    let expect = [[0.0, -0.5], [1.0, 0.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((n[i][j] - expect[i][j]).abs() < 1e-12, "{n:?}");
        }
    }
    let g: Vec<f64> = serde_json::from_value(doc["G"].clone()).unwrap();
    assert!((g[0] + 0.25).abs() < 1e-12 && g[1].abs() < 1e-12);
}

#[test]
fn geodesic_runs_write_bit_stable_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", SPHERE);
    let out = |sub: &str| {
        let od = dir.path().join(sub);
        let doc = stdout_json(&t2m(&["geodesic", "--config", cfg.to_str().unwrap(), "--out-dir", od.to_str().unwrap()]));
        (od, doc)
    };
    let (a, doc) = out("a");
    let (b, _) = out("b");
    let bytes = std::fs::read(a.join("geodesic.csv")).unwrap();
    assert_eq!(bytes, std::fs::read(b.join("geodesic.csv")).unwrap());
    assert!(doc["sup_res_h1"].as_f64().unwrap() < 1e-5 && doc["sup_res_h2"].as_f64().unwrap() < 1e-5);
    let summary: Value = serde_json::from_slice(&std::fs::read(a.join("geodesic_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["samples"], doc["samples"]);

    let (header, rows) = csv_rows(&a.join("geodesic.csv"));
    assert_eq!(header, ["t", "x_1", "x_2", "y_1", "y_2", "y2_1", "y2_2", "res_h1", "res_h2"]);
    assert_eq!(rows.len(), 1572);
    for r in &rows {
        assert!((r[1] - PI / 2.0).abs() < 1e-10 && (r[2] - r[0]).abs() < 1e-10);
    }
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.5707963267948966e0,"));
}

#[test]
fn drag_geodesic_decays_and_flat_run_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "d.json", DRAG);
    stdout_json(&t2m(&["geodesic", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]));
    let (_, rows) = csv_rows(&dir.path().join("geodesic.csv"));
    for r in &rows {
        assert!((r[3] - (-r[0]).exp()).abs() < 1e-8);
    }

    let flat = r#"{"model": {"kind": "euclidean", "n": 2},
        "initial": {"x": [1.0, 2.0], "y": [0.5, -0.25]},
        "integrator": {"dt": 0.125, "t_end": 1.0},
        "outputs": {"trajectory_csv": "sub/line.csv", "report_json": "sub/line.json"}}"#;
    let cfg = write(dir.path(), "f.json", flat);
    stdout_json(&t2m(&["geodesic", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]));
    assert!(dir.path().join("sub/line.json").exists());
    let (_, rows) = csv_rows(&dir.path().join("sub/line.csv"));
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!((r[1], r[2]), (1.0 + 0.5 * r[0], 2.0 - 0.25 * r[0]));
    }
}

#[test]
fn jacobi_reports_residual_and_oracle() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", SPHERE);
    let od = dir.path().to_str().unwrap();
    let doc = stdout_json(&t2m(&["jacobi", "--config", cfg.to_str().unwrap(), "--out-dir", od, "--oracle"]));
    assert!(doc["sup_res_v2"].as_f64().unwrap() < 1e-5);
    assert_eq!(doc["oracle"]["agrees"], Value::Bool(true));
    let (header, rows) = csv_rows(&dir.path().join("jacobi.csv"));
    assert_eq!(&header[7..], ["w_1", "w_2", "w1_1", "w1_2", "res_h1", "res_h2", "res_v2"]);
    for r in &rows {
        assert!((r[7] - r[0].sin()).abs() < 1e-6 && (r[9] - r[0].cos()).abs() < 1e-6);
    }

    let no_oracle = stdout_json(&t2m(&["jacobi", "--config", cfg.to_str().unwrap(), "--out-dir", od]));
    assert!(no_oracle.get("oracle").is_none());
}

fn expect_exit(out: &Output, code: i32) -> String {
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn config_errors_exit_two_with_one_line() {
    let dir = TempDir::new().unwrap();
    let p = |name: &str, text: &str| write(dir.path(), name, text).to_str().unwrap().to_string();
    let cases = [
        p("broken.json", "{ not json"),
        p("dims.json", &SPHERE.replace("[0.0, 1.0], \"w\"", "[0.0, 1.0, 0.0], \"w\"")),
        p("randers.json", r#"{"model": {"kind": "randers", "b": [0.9, 0.9]}}"#),
        p("nointegrator.json", r#"{"model": {"kind": "sphere"}, "initial": {"x": [1.0, 0.0], "y": [0.0, 1.0]}}"#),
        dir.path().join("missing.json").to_str().unwrap().to_string(),
    ];
    for cfg in &cases {
        let err = expect_exit(&t2m(&["geodesic", "--config", cfg, "--out-dir", dir.path().to_str().unwrap()]), 2);
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error: config error"), "{err}");
    }
    let nowf = p("now.json", &SPHERE.replace(", \"w\": [0.0, 0.0], \"w_dot\": [1.0, 0.0]", ""));
    expect_exit(&t2m(&["jacobi", "--config", &nowf]), 2);
    expect_exit(&t2m(&["coeffs", "--config", &nowf, "--at", "x=1;y=1"]), 2);
    expect_exit(&t2m(&["coeffs", "--config", &nowf, "--at", "x=1,0;y=0,0"]), 2);
}

#[test]
fn integration_failures_exit_three() {
    let dir = TempDir::new().unwrap();
    let pole = r#"{"model": {"kind": "sphere"},
        "initial": {"x": [0.5, 0.0], "y": [-1.0, 0.0]},
        "integrator": {"dt": 0.01, "t_end": 1.0}}"#;
    let cfg = write(dir.path(), "pole.json", pole);
    let err = expect_exit(&t2m(&["geodesic", "--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]), 3);
    assert!(err.contains("aborted at t ="), "{err}");
    assert!(!dir.path().join("geodesic.csv").exists());
}

#[test]
fn verify_subsets_and_negative_control() {
    let dir = TempDir::new().unwrap();
    let od = dir.path().to_str().unwrap();
    let out = t2m(&["verify", "--suite", "drag", "--out-dir", od]);
    expect_exit(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    assert!(text.lines().last().unwrap().ends_with("PASS"));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["records"].as_array().unwrap().len(), 3);

    let homog = t2m(&["verify", "--suite", "homogeneity", "--seed", "7"]);
    expect_exit(&homog, 0);
    let text = String::from_utf8(homog.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).all(|l| l.contains("homogeneity.")));

    let tight = t2m(&["verify", "--suite", "jacobi_closed_form", "--tolerance-scale", "1e-30"]);
    let err = expect_exit(&tight, 1);
    assert!(err.contains("verification failed"), "{err}");
    assert!(String::from_utf8(tight.stdout).unwrap().contains("FAIL jacobi_closed_form.sin"));

    expect_exit(&t2m(&["verify", "--suite", "bogus"]), 2);
    expect_exit(&t2m(&["verify", "--suite", "drag", "--tolerance-scale", "0"]), 2);
}

#[test]
fn config_round_trip_is_idempotent() {
    for text in [SPHERE, DRAG, r#"{"model": {"kind": "randers", "b": [0.3, 0.1], "b_gradient": [[0.0, 0.2], [-0.2, 0.0]]},
        "diff": {"mode": "forced_finite_difference", "h1": 0.001},
        "outputs": {"trajectory_csv": "a.csv"}}"#]
    {
        let first = ScenarioConfig::from_json(text).unwrap().to_json();
        let second = ScenarioConfig::from_json(&first).unwrap().to_json();
        assert_eq!(first, second);
        assert!(ScenarioConfig::from_json(&first).unwrap().build().is_ok());
    }
}
