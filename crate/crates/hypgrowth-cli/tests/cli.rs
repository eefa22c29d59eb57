use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hypgrowth(config: &str, dir: &Path, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hypgrowth"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn growth_on_safin_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"growth","space":{"backend":"free_group_tree","rank":2},"set":{"kind":"safin","n":4},"n_max":3}"#;
    let out = hypgrowth(cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    let sizes: Vec<u64> = r["sizes"].as_array().unwrap().iter().map(|s| s["size"].as_u64().unwrap()).collect();
    assert_eq!(sizes, [10, 35, 148]);
    assert!(r["sizes"].as_array().unwrap().iter().all(|s| s["holds"] == true && s["bound"].is_string()));
    assert_eq!(r["config_echo"]["set"]["n"], 4);
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("n,size,exponent,bound,bound_approx,holds\n1,10,"));
}

#[test]
fn paper_mode_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"growth","space":{"backend":"free_group_tree","rank":2},"set":{"kind":"safin","n":2},"n_max":2}"#;
    let out = hypgrowth(cfg, dir.path(), &["--mode", "paper"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path())["config_echo"]["mode"]["kind"], "paper");
}

#[test]
fn config_errors_exit_4_with_json_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        r#"{"command":"growth","space":{"backend":"lattice"},"set":{"kind":"safin","n":2}}"#,
        r#"{"command":"growth","space":{"backend":"free_group_tree","rank":2},"set":{"kind":"safin","n":2},"colour":1}"#,
        r#"{"command":"growth","space":{"backend":"free_group_tree","rank":2},"set":{"kind":"explicit","elements":["aq"]}}"#,
        "not json",
    ] {
        let out = hypgrowth(cfg, dir.path(), &[]);
        assert_eq!(out.status.code(), Some(4), "{cfg}");
        let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(diag["error"], "config");
        assert!(diag["message"].is_string());
    }
}

#[test]
fn budget_truncation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"growth","space":{"backend":"free_group_tree","rank":2},"set":{"kind":"safin","n":8},"n_max":4}"#;
    let out = hypgrowth(cfg, dir.path(), &["--budget", "100"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(dir.path())["status"], "budget");
}

/// The default suite fails only the optimality-exponent criterion, whose
/// fitted slopes miss the asymptotic exponents at the prescribed N.
#[test]
fn verify_all_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"verify-all"}"#;
    let first = hypgrowth(cfg, dir.path(), &[]);
    let a = fs::read(dir.path().join("out/report.json")).unwrap();
    let second = hypgrowth(cfg, dir.path(), &[]);
    let b = fs::read(dir.path().join("out/report.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(first.status.code(), second.status.code());
    assert_eq!(first.status.code(), Some(1));
    let r = report(dir.path());
    let trace: Vec<&str> = r["case_trace"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(trace[0], "criterion 1: fail");
    assert!(trace[1..].iter().all(|l| l.ends_with(": pass")), "{trace:?}");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        hypgrowth::config::ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 8);
}
