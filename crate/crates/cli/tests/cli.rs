use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn topo_align(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topo-align"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bounds_table_has_the_theorem_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bounds.json",
        r#"{"kernel": "uniform", "n_values": [101], "runs": 2, "seed": 1, "t_end": 0.0, "alpha": [1.0]}"#,
    );
    let out = dir.path().join("out");
    let run = topo_align(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(run.status.success());
    let table = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert_eq!(String::from_utf8(run.stdout).unwrap(), table);
    let row = table.lines().find(|l| l.starts_with("101,0,1,1,")).unwrap();
    let theorem: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
    assert!((theorem - 0.367_511_652_275_15).abs() < 1e-12);
}

#[test]
fn kernel_check_reports_normalization_and_a() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "kernel.json",
        r#"{"kernel": {"name": "paper_example", "truncation": 20}, "n_values": [101], "runs": 2, "seed": 1, "t_end": 1.0}"#,
    );
    let out = dir.path().join("out");
    let run = topo_align(&[
        "kernel-check",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let field = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line[key.len()..].trim().parse().unwrap()
    };
    assert!(field("# normalization_residual:") <= 1e-9);
    assert!((field("# A:") / 1.128e4 - 1.0).abs() < 5e-4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "typo.json",
        r#"{"kerenl": "uniform", "n_values": [10], "runs": 2, "seed": 1, "t_end": 1.0}"#,
    );
    let run = topo_align(&[
        "study",
        "--config",
        &cfg,
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8(run.stderr).unwrap().contains("kerenl"));

    let cfg = write_config(
        dir.path(),
        "alpha.json",
        r#"{"kernel": "uniform", "n_values": [10], "runs": 2, "seed": 1, "t_end": 1.0, "alpha": [0.5]}"#,
    );
    let run = topo_align(&["bounds", "--config", &cfg]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8(run.stderr)
        .unwrap()
        .contains("alpha must exceed log 2"));
}

#[test]
fn numerical_degeneracy_exits_with_three_and_cleans_up() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "degenerate.json",
        r#"{"kernel": "paper_example", "n_values": [2], "runs": 2, "seed": 1, "t_end": 5.0}"#,
    );
    let out = dir.path().join("out");
    let run = topo_align(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn missing_config_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let run = topo_align(&["solve", "--config", missing.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(4));
}

#[test]
fn simulate_and_solve_write_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "small.json",
        r#"{"kernel": "linear", "n_values": [8], "runs": 2, "seed": 3, "t_end": 0.5, "snapshot_times": [0.0, 0.5],
            "solver": {"nx": 16, "nv": 2, "dt": 0.05}, "histogram": {"nx": 8}}"#,
    );
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert!(
        topo_align(&["simulate", "--config", &cfg, "--out", o, "--seed", "9"])
            .status
            .success()
    );
    for name in [
        "events_N8_run0.csv",
        "snapshot_N8_run1_t1.csv",
        "manifest_N8_run0.json",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    let snapshot = fs::read_to_string(out.join("snapshot_N8_run0_t1.csv")).unwrap();
    assert_eq!(snapshot.lines().next(), Some("particle_index,x0,v0"));
    assert_eq!(snapshot.lines().count(), 9);

    assert!(topo_align(&["solve", "--config", &cfg, "--out", o])
        .status
        .success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["times"], serde_json::json!([0.0, 0.5]));
    assert!(out.join("distribution_t1.bin").exists());
}

#[test]
fn study_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "study.json",
        r#"{"kernel": "uniform", "n_values": [20, 40], "runs": 20, "seed": 5, "t_end": 0.5,
            "solver": {"nx": 32, "nv": 2}, "histogram": {"nx": 16}}"#,
    );
    let reports: Vec<String> = ["1", "3"]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}"));
            assert!(topo_align(&[
                "study",
                "--config",
                &cfg,
                "--out",
                out.to_str().unwrap(),
                "--workers",
                w
            ])
            .status
            .success());
            fs::read_to_string(out.join("report.csv")).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert!(reports[0]
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("N,t,metric,value,stderr"));
}
