use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "scenario": "small",
  "domain": {"a1": 1.0, "a2": 1.0},
  "alpha": [0.5],
  "mu": [0.25, 0.5],
  "h": 0.0625
}"#;

#[test]
fn missing_or_invalid_config_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["eig", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let bad = write_config(dir.path(), "bad.json", r#"{"domain": {"a1": 1, "a2": 1}, "alpha": [2.0]}"#);
    assert_eq!(run(&["sweep-mu", "--config", &bad]).status.code(), Some(3));

    let cfg = write_config(dir.path(), "ok.json", SMALL);
    let out = run(&["eig", "--config", &cfg, "--alpha", "1.2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_mu_writes_a_sorted_csv_and_a_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let out_dir = dir.path().join("out");
    let out = run(&["sweep-mu", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep_mu.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "mu,alpha,h,xi,lambda,outcome,sup_n,runtime_s");
    // mu = 0 joins the list
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.0000000000000000e0,"));
    assert!(fs::read_dir(&out_dir).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "svg")));
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", SMALL);
    let out_dir = dir.path().join("eig");
    let out = run(&[
        "eig", "--config", &cfg, "--alpha", "0.3", "--mu", "0.75", "--h", "0.125", "--out", out_dir.to_str().unwrap(),
        "--dump-matrix",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("eig.json")).unwrap()).unwrap();
    let text = json.to_string();
    assert!(text.contains("0.3") && text.contains("0.75") && text.contains("0.125"), "{text}");
    let has_bin = fs::read_dir(&out_dir).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "bin"));
    assert!(has_bin);
}

#[test]
fn figures_that_do_not_settle_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        r#"{
  "domain": {"a1": 2.0, "a2": 2.0},
  "alpha": [0.5],
  "h": 0.0625,
  "march": {"dt": 0.1, "t_end": 20.0, "snapshot_every": 10.0}
}"#,
    );
    let out_dir = dir.path().join("figs");
    let out = run(&["figures", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL") && stdout.contains("PASS"), "{stdout}");
}

#[test]
fn steady_reports_persistence_for_a_long_patch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"domain": {"intervals": [[0.0, 6.0]]}, "alpha": [0.5], "h": 0.0625}"#,
    );
    let out_dir = dir.path().join("steady");
    let out = run(&["steady", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = fs::read_to_string(out_dir.join("steady.json")).unwrap();
    assert!(json.contains("persistence"), "{json}");
}
