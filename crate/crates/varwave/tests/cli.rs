//! End-to-end tests of the `varwave` binary.

use std::fs;
use std::process::Command;

fn varwave() -> Command {
    Command::new(env!("CARGO_BIN_EXE_varwave"))
}

const BASE_CFG: &str = "n_cells = 128\nx_min = -15\nx_max = 15\nscenario = gauss_rs_neg\nt_end = 1\nsnapshot_times = 0, 0.5, 1\n";

#[test]
fn scenarios_lists_builtins() {
    let out = varwave().arg("scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["gauss_rs", "gauss_rs_neg", "glassey_pulse"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
    assert!(text.contains("scenario.r_amp"));
}

#[test]
fn run_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, BASE_CFG).unwrap();
    let out_dir = dir.path().join("out");
    let out = varwave()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .env("VARWAVE_OUTPUT_DIR", &out_dir)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout:\n{stdout}");
    assert!(stdout.contains("CHECK energy_ledger: PASS"), "{stdout}");

    let series = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,energy,l1,l3,diss_cum,r_max,s_max,r_min,s_min,hlem_residual_max,hi_alpha"
    );
    assert!(lines.next().unwrap().starts_with("0.0000000000000000e0,"));
    for name in ["snapshot_0.csv", "snapshot_0.5.csv", "snapshot_1.csv"] {
        let snap = fs::read_to_string(out_dir.join(name)).unwrap();
        assert!(snap.starts_with("x,u,R,S\n"), "{name} header wrong");
        // One row per edge plus the header.
        assert_eq!(snap.lines().count(), 1 + 128 + 1);
    }
}

#[test]
fn check_passes_without_writing_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, BASE_CFG).unwrap();
    let out_dir = dir.path().join("out");
    let out = varwave()
        .args(["check", "--config"])
        .arg(&cfg_path)
        .env("VARWAVE_OUTPUT_DIR", &out_dir)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout:\n{stdout}");
    assert!(stdout.contains("chain_rule_random"));
    assert!(stdout.contains("hlem_random"));
    assert!(!out_dir.exists(), "check must not write outputs");
}

#[test]
fn refine_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "n_cells = 64\nx_min = -15\nx_max = 15\nscenario = gauss_rs_neg\nt_end = 1\n",
    )
    .unwrap();
    let out = varwave()
        .args(["refine", "--levels", "3", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout:\n{stdout}");
    assert!(stdout.contains("observed order"), "{stdout}");
}

#[test]
fn bad_config_reports_line_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.cfg");
    fs::write(&cfg_path, "n_cells = 64\nwhat_is_this = 3\n").unwrap();
    let out = varwave()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("what_is_this"), "stderr:\n{stderr}");
    assert!(stderr.contains("line 2"), "stderr:\n{stderr}");
}

#[test]
fn hypothesis_violating_scenario_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "n_cells = 128\nx_min = -15\nx_max = 15\nscenario = gauss_rs\nt_end = 0.5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = varwave()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .env("VARWAVE_OUTPUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("not nonpositive"),
        "expected sign warning, stderr:\n{stderr}"
    );
}

#[test]
fn supercritical_unit_ratio_run_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("glassey.cfg");
    // Δt = Δx = 30/256 with the explicit scheme and both snapshots.
    fs::write(
        &cfg_path,
        "n_cells = 256\nx_min = -15\nx_max = 15\nscenario = glassey_pulse\nt_end = 2\n\
         scheme = explicit\nu_update = space\ndt = 0.1171875\nsnapshot_times = 0, 1, 2\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    // Without the flag the run stops at the CFL guard once c(u)·dt/dx > 1.
    let out = varwave()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .env("VARWAVE_OUTPUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("CFL"), "stderr:\n{stderr}");

    let out = varwave()
        .args(["run", "--allow-supercritical", "--config"])
        .arg(&cfg_path)
        .env("VARWAVE_OUTPUT_DIR", &out_dir)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout:\n{stdout}");
    for name in ["snapshot_0.csv", "snapshot_1.csv", "snapshot_2.csv"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    // The non-monotone speed warning is expected for the liquid crystal.
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not monotone"), "stderr:\n{stderr}");
}
