use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn varcap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varcap")).args(args).arg("--out").arg(out).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SPHERE: &str = r#"{
  "variables": ["z1", "z2", "z3"],
  "ideal": ["z1^2+z2^2+z3^2-1"],
  "noether_split": {"x": ["z1", "z2"], "y": ["z3"]},
  "base_point": [["0", "0"], ["0", "0"], ["1", "0"]]
}"#;

#[test]
fn parse_echoes_canonical_generators() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sphere.json");
    std::fs::write(&file, SPHERE).unwrap();
    let out = varcap(&["parse", "--variety", file.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["ideal"][0], "z1^2 + z2^2 + z3^2 - 1");
}

#[test]
fn demo_sphere_writes_the_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let out = varcap(&["demo", "sphere", "--kmax", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read_json(&dir.path().join("okounkov.json"));
    let vertices: Vec<Vec<String>> = serde_json::from_value(doc["body_vertices"].clone()).unwrap();
    let mut vertices: Vec<(String, String)> = vertices.into_iter().map(|v| (v[0].clone(), v[1].clone())).collect();
    vertices.sort();
    let s = |a: &str, b: &str| (a.to_string(), b.to_string());
    assert_eq!(vertices, vec![s("0", "0"), s("0", "1"), s("2", "0")]);
    assert_eq!(doc["volume"], "1");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["options"]["kmax"], 4);
    let comparisons = read_json(&dir.path().join("comparisons.json"));
    assert_eq!(comparisons["circled"]["half"][0]["hypothesis_violated"], true);
}

#[test]
fn tdiam_on_circle_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let points: Vec<Value> = (0..512)
        .map(|l| {
            let t = 2.0 * std::f64::consts::PI * l as f64 / 512.0;
            serde_json::json!([[t.cos().to_string(), t.sin().to_string()]])
        })
        .collect();
    let file = dir.path().join("circle512.json");
    std::fs::write(&file, serde_json::json!({ "points": points }).to_string()).unwrap();
    let out = varcap(&["tdiam", "--cloud", file.to_str().unwrap(), "--kmax", "8"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("dk_sequence.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0], "8");
    let d8: f64 = fields[6].parse().unwrap();
    assert!((d8 / 9f64.powf(1.0 / 16.0) - 1.0).abs() <= 0.02, "{d8}");
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let missing = varcap(&["okounkov", "--variety", "does-not-exist.json"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"], "invalid_input");

    let guard = varcap(&["okounkov", "--kmax", "17"], dir.path());
    assert_eq!(guard.status.code(), Some(1));

    let file = dir.path().join("sphere.json");
    std::fs::write(&file, SPHERE).unwrap();
    let cloud = dir.path().join("pts.csv");
    let rows: Vec<String> = (0..30)
        .map(|i| {
            let t = 0.37 * i as f64;
            let z = -1.0 + 2.0 * (i as f64 + 0.5) / 30.0;
            let r = (1.0 - z * z).sqrt();
            format!("{},0,{},0,{},0,1,0", r * t.cos(), r * t.sin(), z)
        })
        .collect();
    std::fs::write(&cloud, rows.join("\n")).unwrap();
    // A gap below double-precision resolution cannot be certified.
    let strict = varcap(
        &["cheb", "--variety", file.to_str().unwrap(), "--cloud", cloud.to_str().unwrap(), "--k", "2", "--gap-tol", "1e-17"],
        dir.path(),
    );
    assert_eq!(strict.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&strict.stderr).unwrap();
    assert_eq!(err["error"], "not_certified");
    assert!(dir.path().join("cheb_transform.csv").exists());
}
