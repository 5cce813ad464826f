use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qcons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcons")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const STAR: &str = r#"{"n": 4, "edges": [[1,0],[0,1],[2,0],[0,2],[3,0],[0,3]]}"#;

#[test]
fn smartgrid_total() {
    let dir = tempfile::tempdir().unwrap();
    for case in ["alg1", "alg2"] {
        let report = dir.path().join(format!("{case}.json"));
        let out = qcons(&["smartgrid", "--case", case, "--report", report.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let r = json(&report);
        assert_eq!(r["total_demand"], 252);
        assert_eq!(r["average"]["num"], 63);
        assert_eq!(r["average"]["den"], 2);
    }
}

#[test]
fn run_writes_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("steps.csv");
    let report = dir.path().join("trace.json");
    let out = qcons(&[
        "run", "--n", "5", "--case", "i", "--seed", "4",
        "--table", table.to_str().unwrap(), "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().next(), Some("step,node,y,z,ys,zs,q,fired"));
    let r = json(&report);
    assert_eq!(r["summary"]["converged"], true);
    assert_eq!(r["summary"]["within_bound"], true);
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let out = qcons(&["sweep", "--n", "8", "--trials", "6", "--case", "alg2", "--seed", "9", "--report", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
    assert_eq!(json(&paths[0])["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn privacy_commands() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("star.json");
    fs::write(&graph, STAR).unwrap();
    let g = graph.to_str().unwrap();

    let out = qcons(&["check-privacy", "--graph", g, "--roles", "p,n,c,c", "--target", "0", "--case", "alg2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["guaranteed"], true);
    assert_eq!(v["condition"], "non_curious_out_neighbor");

    let out = qcons(&["adversary", "--graph", g, "--roles", "p,c,c,c", "--target", "0", "--case", "alg2", "--states", "2,3,1,4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["consistent_values"], serde_json::json!([2]));
    assert_eq!(v["privacy_preserved"], false);
}

#[test]
fn bad_input_fails() {
    let out = qcons(&["run", "--n", "5", "--states", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qcons(&["sweep", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
