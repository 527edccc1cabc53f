use std::fs;
use std::path::Path;
use std::process::Command;

fn sweep() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sweep"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"
outputs = ["current", "noise", "rectification"]

[model]
lambda = 0.1

[baths]
T0 = 1.0

[[grid]]
name = "delta_T"
min = 0.2
max = 1.4
count = 7
"#;

#[test]
fn output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let mut csvs = Vec::new();
    for w in ["1", "8"] {
        let out = dir.path().join(format!("w{w}.csv"));
        let st = sweep()
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", w])
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        assert!(out.with_extension("json").exists());
        csvs.push(fs::read(&out).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("delta_T[omega_a],current[omega_a^2],noise[omega_a^3],rectification[1]"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn sidecar_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("r.csv");
    sweep()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(v["config"]["model"]["lambda"], 0.1);
    assert_eq!(v["points"].as_array().unwrap().len(), 7);
    assert_eq!(v["failed"], 0);
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    for text in [
        "[model]\nlambda = 0.4\n[[grid]]\nname = \"delta_T\"\nvalues = [0.5]\n",
        "[model]\nlambda = \n",
        "bogus = 1\n",
        "[[grid]]\nname = \"delta_T\"\nvalues = [3.0]\n",
    ] {
        let cfg = write(dir.path(), "bad.toml", text);
        let o = sweep()
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
        assert!(!out.exists());
    }
}

#[test]
fn failed_points_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "outputs = [\"rectification\"]\n[model]\nlambda = 0.1\n[[grid]]\nname = \"delta_T\"\nvalues = [0.0, 1.0]\n",
    );
    let out = dir.path().join("r.csv");
    let st = sweep()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].contains("error"));
    assert!(rows[1].ends_with(",ok"));
}

#[test]
fn unwritable_output_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("missing/dir/r.csv");
    let st = sweep()
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn preset_runs_and_dumps_overlaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2e.csv");
    let st = sweep()
        .args(["--preset", "fig2e", "--out", out.to_str().unwrap(), "--dump-overlaps"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let rows = fs::read_to_string(&out).unwrap().lines().count();
    assert_eq!(rows, 82);
    let overlaps = fs::read_to_string(out.with_extension("overlaps.csv")).unwrap();
    assert!(overlaps.lines().count() > 1);
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let st = sweep()
        .args(["--preset", "fig9", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));
}
