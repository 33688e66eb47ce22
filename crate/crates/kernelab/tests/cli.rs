//! End-to-end checks of the command-line interface.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kernelab"))
}

#[test]
fn kernel_check_passes() {
    let out = bin().arg("kernel-check").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("all kernel checks passed"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn gp_convergence_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    let out = bin()
        .args([
            "gp-convergence",
            "--m0",
            "2.0",
            "--m",
            "2.0",
            "--n-grid",
            "20:40:10",
            "--reps",
            "5",
            "--test-points",
            "20",
            "--seed",
            "11",
            "--out",
            json_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&json_path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["seed"], 11);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["config"]["kind"], "gp");
}

#[test]
fn config_file_is_merged_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"m0": 2.0, "m": 3.0, "n_grid": [20, 30], "replications": 4,
            "test_points": 15, "seed": 5}"#,
    )
    .unwrap();
    let out_path = dir.path().join("r.json");
    let out = bin()
        .args([
            "gp-convergence",
            "--config",
            cfg_path.to_str().unwrap(),
            "--seed",
            "99",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    // flag overrides the file seed, file supplies the rest
    assert_eq!(v["seed"], 99);
    assert_eq!(v["config"]["experiment"]["m"], 3.0);
    assert_eq!(v["config"]["experiment"]["replications"], 4);
}

#[test]
fn krr_convergence_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("krr.json");
    let out = bin()
        .args([
            "krr-convergence",
            "--target",
            "triangle",
            "--m",
            "2.0",
            "--n-grid",
            "20:40:10",
            "--reps",
            "4",
            "--test-points",
            "15",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["config"]["kind"], "krr");
    assert_eq!(v["config"]["target"], "triangle");
    // rate holds up to a sub-polynomial factor for the triangle at m = 2
    assert_eq!(v["up_to_subpolynomial_factor"], true);
}

#[test]
fn power_function_subcommand() {
    let out = bin()
        .args(["power-function", "--m0", "1.0", "--n-grid", "20:60:20"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("bound exponent"));
}

#[test]
fn table2_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["table2", "--seed", "42", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seed"], 42);
    assert_eq!(summary["rows"].as_array().unwrap().len(), 4);
    for i in 1..=4 {
        let stem: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(&format!("row{i}_")))
            .collect();
        assert_eq!(stem.len(), 2, "expected csv+json for row {i}");
    }
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = bin()
        .args(["gp-convergence", "--m0", "2.0", "--m", "2.0", "--n-grid", "oops"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lo:hi:step"));

    let out = bin()
        .args(["krr-convergence", "--target", "sawtooth"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
