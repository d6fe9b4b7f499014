use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dense-wifi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"duration_s": 0.5, "warmup_s": 0.1}"#);
    let out = dir.path().join("out");
    let o = cli(&["run", "--config", &cfg, "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["throughput.csv", "cdf.csv", "topology.json", "config_echo.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("config_echo.json")).unwrap()).unwrap();
    assert_eq!(echo["seed"], 3);
}

#[test]
fn json_format_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"duration_s": 0.3, "warmup_s": 0.1}"#);
    let out = dir.path().join("out");
    let o = cli(&[
        "run", "--config", &cfg, "--format", "json", "--trace", "phy,mac", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["throughput.json", "phy_trace.json", "mac_trace.json"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap();
    }
}

#[test]
fn grid_run_writes_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenario": "grid", "duration_s": 0.3, "warmup_s": 0.1,
            "grid": {"cells_per_side": 4, "reuse": 4}}"#,
    );
    let out = dir.path().join("out");
    let o = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(out.join("scaling.csv")).unwrap().contains("wifi_reuse4"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"duration_s": -1}"#);
    assert_eq!(cli(&["run", "--config", &bad]).status.code(), Some(2));
    let unknown = write_config(dir.path(), r#"{"no_such_field": 1}"#);
    assert_eq!(cli(&["run", "--config", &unknown]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(cli(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let o = cli(&["sweep", "--axis", "bogus", "--values", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_runs_each_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = cli(&[
        "sweep", "--axis", "intercell_pl", "--values", "86,106", "--duration", "0.3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn replay_and_oracle() {
    for t in ["fig3", "fig4"] {
        let o = cli(&["replay", "--timeline", t]);
        assert_eq!(o.status.code(), Some(0));
        assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    }
    let o = cli(&["oracle", "bianchi", "--n-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 6);
}
