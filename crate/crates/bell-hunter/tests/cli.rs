//! End-to-end checks of the `bell-hunter` binary: exit codes, file outputs,
//! config-file merging and the see-saw JSON report.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bell-hunter"))
}

/// Per-test scratch directory; tests run in parallel and each manifest.json
/// lands next to its own CSV.
fn tmp(test: &str, name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join(format!("bell-hunter-cli-{}", std::process::id()))
        .join(test);
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn werner_sweep_writes_csv_and_manifest() {
    let out = tmp("werner", "cli-werner.csv");
    let status = bin()
        .args([
            "werner-sweep",
            "--grid",
            "0.5,0.9",
            "--shots",
            "20",
            "--iters",
            "5",
            "--trajectories",
            "4",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,point,state_id,k,N,K,mean_s,median_s,q1,q3,mse_mean,mse_median,theory_s"
    );
    // 2 points x (1 state + aggregate) x 5 iterations.
    assert_eq!(lines.count(), 2 * 2 * 5);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp("werner", "manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["experiment"], "werner_sweep");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["n_shots"], 20);
}

#[test]
fn invalid_grid_exits_with_code_2() {
    let status = bin()
        .args(["werner-sweep", "--grid", "1.5", "--out"])
        .arg(tmp("invalid-grid", "never.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_experiment_exits_with_code_2() {
    let status = bin().args(["frobnicate"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_experiment_exits_with_code_2() {
    let status = bin().status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = tmp("config", "run.cfg");
    let out = tmp("config", "cli-config.csv");
    std::fs::write(
        &cfg,
        format!(
            "experiment = werner_sweep\ngrid = 0.8\nshots = 10\niters = 3\n\
             trajectories = 2\nstates = 1\nseed = 11\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    // Flag overrides the file's shots = 10.
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--shots", "25"])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp("config", "manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["n_shots"], 25);
    assert_eq!(manifest["seed"], 11);
}

#[test]
fn bad_config_file_exits_with_code_2() {
    let cfg = tmp("bad-config", "bad.cfg");
    std::fs::write(&cfg, "experiment = werner_sweep\nbogus = 1\n").unwrap();
    let status = bin().args(["--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn seesaw_oracle_reports_singlet() {
    // Singlet projector as nested [re, im] arrays.
    let rho = bell_hunter::states::singlet::<f64>().density();
    let input = tmp("singlet", "singlet.json");
    std::fs::write(&input, serde_json::to_string(&rho.to_json()).unwrap()).unwrap();

    let out = tmp("singlet", "singlet-report.json");
    let output = bin()
        .args(["seesaw-oracle", "--input"])
        .arg(&input)
        .args(["--seed", "5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());

    let stdout: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(stdout, written);

    let tsirelson = 2.0 * 2.0_f64.sqrt();
    assert!((stdout["s_max"].as_f64().unwrap() - tsirelson).abs() < 1e-8);
    assert!((stdout["m_quantity"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((stdout["negativity"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!(stdout["converged"].as_bool().unwrap());
    // Settings blocks are pairs of [re, im] pairs.
    let block = stdout["optimal_settings"]["a"].as_array().unwrap();
    assert_eq!(block.len(), 2);
    assert_eq!(block[0].as_array().unwrap().len(), 2);
}

#[test]
fn seesaw_oracle_accepts_pure_state_input() {
    let psi = bell_hunter::states::haar_pure::<f64>(&mut bell_hunter::RandomStream::seeded(8));
    let input = tmp("pure", "pure.json");
    std::fs::write(&input, serde_json::to_string(&psi.to_json()).unwrap()).unwrap();

    let output = bin()
        .args(["seesaw-oracle", "--input"])
        .arg(&input)
        .args(["--seed", "5", "--out"])
        .arg(tmp("pure", "pure-report.json"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let want =
        bell_hunter::oracle::max_chsh_pure(bell_hunter::states::schmidt_coefficient(&psi)).unwrap();
    assert!((report["s_max"].as_f64().unwrap() - want).abs() < 1e-6);
}

#[test]
fn seesaw_oracle_missing_input_exits_with_code_2() {
    let status = bin().args(["seesaw-oracle"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn seesaw_oracle_malformed_input_exits_with_code_1() {
    let input = tmp("garbage", "garbage.json");
    std::fs::write(&input, "{\"not\": \"a state\"}").unwrap();
    let status = bin()
        .args(["seesaw-oracle", "--input"])
        .arg(&input)
        .args(["--out"])
        .arg(tmp("garbage", "garbage-report.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
