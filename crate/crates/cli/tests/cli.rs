use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hebo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hebo")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn run_then_score() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(
        dir.path(),
        "plan.json",
        r#"{"functions":["branin"],"solvers":[{"name":"random"},{"name":"hebo","config":{"moo":{"pop_size":20,"generations":10}}}],
            "iterations":1,"batch":3,"seeds":[0,1]}"#,
    );
    let out_dir = dir.path().join("results");
    let out = hebo(&["run", "--plan", &plan, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2 * 3);
    assert!(csv.starts_with("solver,function,seed,iteration,batch_index,config_json,loss,best_so_far,wall_ms"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let scored = stdout_json(&hebo(&["score", "--in", out_dir.to_str().unwrap(), "--baseline", "random"]));
    assert_eq!(summary, scored);
    assert_eq!(scored["functions"][0]["solvers"][0]["mean"], 100.0);
}

#[test]
fn run_rejects_unknown_function() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write(dir.path(), "plan.json", r#"{"functions":["rosenbrock"],"solvers":[{"name":"random"}]}"#);
    let out = hebo(&["run", "--plan", &plan, "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rosenbrock"));
}

#[test]
fn stats_levene_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    // scipy.stats.levene([1,2,3,4], [2,4,6,8,10], center='mean')
    let input = write(dir.path(), "g.csv", "group,value\na,1\na,2\na,3\na,4\nb,2\nb,4\nb,6\nb,8\nb,10\n");
    let v = stdout_json(&hebo(&["stats", "--test", "levene", "--input", &input]));
    assert!((v["statistic"].as_f64().unwrap() - 2.499_089_253_187_612_8).abs() < 1e-10);
    assert!((v["p_value"].as_f64().unwrap() - 0.157_924_710_985_924_03).abs() < 1e-10);
    assert_eq!(v["dof"], serde_json::json!([1.0, 7.0]));
}

#[test]
fn stats_ttest_paired_and_alternative() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "x,1.0\nx,2.0\nx,3.5\nx,4.0\ny,0.5\ny,1.8\ny,2.0\ny,3.9\n");
    let two = stdout_json(&hebo(&["stats", "--test", "ttest", "--input", &input]));
    let greater = stdout_json(&hebo(&["stats", "--test", "ttest", "--input", &input, "--alternative", "greater"]));
    let (p2, p1) = (two["p_value"].as_f64().unwrap(), greater["p_value"].as_f64().unwrap());
    assert!((p1 - p2 / 2.0).abs() < 1e-12);
    assert_eq!(two["dof"], 3.0);
    let three = write(dir.path(), "t.csv", "a,1\na,2\nb,1\nb,2\nc,1\nc,3\n");
    assert!(!hebo(&["stats", "--test", "ttest", "--input", &three]).status.success());
}

#[test]
fn gpfit_reports_json() {
    let v = stdout_json(&hebo(&[
        "gpfit", "--function", "nonstationary1d", "--seeds", "3", "--toggle", "warp", "--n-train", "12", "--n-test", "30",
    ]));
    assert_eq!(v["toggle"], "warp");
    assert_eq!(v["seeds"].as_array().unwrap().len(), 3);
    assert!(!hebo(&["gpfit", "--function", "nope", "--seeds", "3", "--toggle", "warp"]).status.success());
}
