use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polynormals"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polynormals-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn write(name: &str, text: &str) -> String {
    let p = tmp(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn square_normals() {
    let f = write("square.csv", "# dim=3 closed=1\n0,0,0\n1,0,0\n1,1,0\n0,1,0\n");
    let o = run(&["normals", "--input", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let normals = v["result"]["normals"].as_array().unwrap();
    assert!((normals[0]["stats"]["length"].as_f64().unwrap() - 2.0 * PI).abs() < 1e-12);
    assert_eq!(normals[1]["stats"]["length"].as_f64().unwrap(), 0.0);
    assert_eq!(v["config"]["seed"].as_u64(), Some(1));
}

#[test]
fn bad_inputs_exit_one() {
    let f = write("bad.csv", "# dim=3 closed=0\n0,0,0\n1,zero,0\n");
    assert_eq!(run(&["normals", "--input", &f]).status.code(), Some(1));
    assert_eq!(run(&["normals", "--input", "/nonexistent/p.csv"]).status.code(), Some(1));
    assert_eq!(run(&["normals", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["normals"]).status.code(), Some(1));
}

#[test]
fn straight_polyline_is_numerical_failure() {
    let f = write("straight.csv", "# dim=3 closed=0\n0,0,0\n1,0,0\n2,0,0\n");
    assert_eq!(run(&["normals", "--input", &f, "--j", "1"]).status.code(), Some(2));
}

#[test]
fn counterexample_round_trips() {
    let prefix = tmp("emon");
    let pre = prefix.display().to_string();
    let o = run(&["counterexample", "--out", &pre, "--format", "both"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(format!("{pre}.json")).unwrap()).unwrap();
    let r = &report["result"];
    let tat_p = r["tat_p"].as_f64().unwrap();
    assert!(r["tat_p_prime"].as_f64().unwrap() > tat_p);
    assert!((tat_p - r["alpha"].as_f64().unwrap() - r["beta"].as_f64().unwrap()).abs() <= 1e-6);

    let p_csv = format!("{pre}_p.csv");
    let o = run(&["normals", "--input", &p_csv, "--j", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let len = stdout_json(&o)["result"]["normals"][0]["stats"]["length"].as_f64().unwrap();
    assert!((len - tat_p).abs() <= 1e-12, "{len} vs {tat_p}");
    assert!(std::fs::read_to_string(format!("{pre}_tat.csv")).unwrap().starts_with("# config="));
}

#[test]
fn converge_circle_and_helix() {
    let o = run(&["converge", "--curve-json", r#"{"curve": "circle"}"#, "--j", "1", "--levels", "512,1024,2048"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["result"]["relative_error"].as_f64().unwrap() * 2.0 * PI <= 1e-3);

    let o = run(&["converge", "--curve-json", r#"{"curve": "helix_r3"}"#, "--j", "2", "--levels", "512,1024,2048"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn converge_eflex_matches_split_quadrature() {
    let o = run(&["converge", "--curve-json", r#"{"curve": "eflex"}"#, "--j", "1", "--levels", "512,1024,2048"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn taylor_helix() {
    let o = run(&["taylor", "--curve-json", r#"{"curve": "helix_r3"}"#, "--at", "1.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn measure_helix() {
    let o = run(&["measure", "--curve-json", r#"{"curve": "helix_r3"}"#, "--j", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["tangential"]["passed"], Value::Bool(true));
}

#[test]
fn intgeo_is_reproducible() {
    let f = write("quad.csv", "# dim=3 closed=1\n0,0,0\n1,0,0.2\n1,1,0\n0,1,0.5\n");
    let args = ["intgeo", "--input", &f, "--j", "0", "--samples", "500", "--seed", "9"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(matches!(a.status.code(), Some(0) | Some(2)));
    assert_eq!(stdout_json(&a)["config"]["seed"].as_u64(), Some(9));
}

#[test]
fn csv_and_json_agree() {
    let f = write("tri.csv", "# dim=3 closed=1\n0,0,0\n4,0,0\n0,2,1\n");
    let prefix = tmp("tri").display().to_string();
    let o = run(&["normals", "--input", &f, "--out", &prefix, "--format", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(format!("{prefix}.json")).unwrap()).unwrap();
    let csv = std::fs::read_to_string(format!("{prefix}_stats.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[1], json["result"]["normals"][0]["stats"]["length"].as_f64().unwrap());
}
