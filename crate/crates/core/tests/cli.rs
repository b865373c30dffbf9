use std::fs;
use std::process::{Command, Output};

use fejerlimit::cli::{execute, Command as Cmd, RunConfig};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fejerlimit"))
        .args(args)
        .env_remove("FEJERLIMIT_SEED")
        .output()
        .expect("binary runs")
}

#[test]
fn identity_check_passes_and_fault_is_caught() {
    let ok = bin(&["--command", "identity-check", "--trials", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    assert!(text.contains("# status: pass"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 11);

    let bad = bin(&[
        "--command",
        "identity-check",
        "--trials",
        "2",
        "--inject-fault",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn single_constant_trial_is_exact() {
    let mut config = RunConfig::for_command(Cmd::IdentityCheck);
    config.trials = 1;
    config.order = 0;
    let report = execute(&config).unwrap();
    assert!(report.passed);
    assert_eq!(report.table.column("max_rel_deviation").unwrap(), vec![0.0]);
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(bin(&[]).status.code(), Some(2));
    assert_eq!(bin(&["--command", "nope"]).status.code(), Some(2));
    assert_eq!(
        bin(&["--command", "ho-expect", "--system", "well"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bin(&[
            "--command",
            "ho-expect",
            "--n-list",
            "3",
            "--half-width",
            "5"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        bin(&["--command", "scan", "--gamma", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn ho_expect_reports_all_observables() {
    let report = execute(&RunConfig::for_command(Cmd::HoExpect)).unwrap();
    assert!(report.passed);
    assert_eq!(report.table.rows.len(), 64);
    for name in ["x", "p", "x2", "p2", "h", "h2"] {
        let dev: f64 = report
            .table
            .summary_value(&format!("max_rel_deviation.{name}"))
            .unwrap()
            .parse()
            .unwrap();
        assert!(dev <= 1e-9, "{name}: {dev}");
    }
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out.csv");
    fs::write(
        &cfg,
        r#"{"command": "gibbs", "order": 5, "format": "json"}"#,
    )
    .unwrap();
    let status = bin(&[
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# program: fejerlimit"));
    assert!(text.contains("# config.order: 5"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "order,partial_overshoot,fejer_overshoot");
    assert_eq!(rows.len(), 6);

    fs::write(&cfg, r#"{"command": "gibbs", "unknown_key": 1}"#).unwrap();
    assert_eq!(
        bin(&["--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn seed_falls_back_to_environment() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_fejerlimit"))
        .args([
            "--command",
            "identity-check",
            "--trials",
            "2",
            "--order",
            "4",
        ])
        .env("FEJERLIMIT_SEED", "9")
        .output()
        .unwrap();
    let with_flag = bin(&[
        "--command",
        "identity-check",
        "--trials",
        "2",
        "--order",
        "4",
        "--seed",
        "9",
    ]);
    let default = bin(&[
        "--command",
        "identity-check",
        "--trials",
        "2",
        "--order",
        "4",
    ]);
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(with_env.stdout, default.stdout);
    assert!(String::from_utf8(default.stdout)
        .unwrap()
        .contains("# config.seed: 42"));
}

#[test]
fn json_mirrors_csv_columns() {
    let out = bin(&[
        "--command",
        "compare",
        "--order",
        "9",
        "--times",
        "300",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        v["columns"],
        serde_json::json!(["t", "signal", "partial", "fejer"])
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 300);
    let over: f64 = v["summary"]["partial_overshoot"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!(over > 0.1);
}

#[test]
fn scan_reports_rates() {
    let mut config = RunConfig::for_command(Cmd::Scan);
    config.times = 64;
    let report = execute(&config).unwrap();
    assert_eq!(report.table.rows.len(), 3);
    let rate: f64 = report
        .table
        .summary_value("rate.classical")
        .unwrap()
        .parse()
        .unwrap();
    assert!(rate < -0.3 && rate > -0.5, "{rate}");
}
