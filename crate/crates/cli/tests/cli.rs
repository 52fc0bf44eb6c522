use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

use twisting_cli::config::RunConfig;
use twisting_cli::{
    cmd_demo_pendulum, cmd_simulate, cmd_verify, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFICATION,
};
use twisting_core::dynamics::lyapunov;
use twisting_core::sim::read_samples_csv;
use twisting_core::GainsF64;

const REFERENCE: &str = "
[params]
R = 2.0
beta = 5.0
rho = 0.5
delta = 3.1
N = 0.2
Ts = 1.0

[gains]
mu1 = 6.63
mu2 = 33.24
";

fn twisting(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twisting"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{REFERENCE}{extra}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn config_in(dir: &Path, extra: &str) -> RunConfig {
    let mut cfg = RunConfig::parse(&format!("{REFERENCE}{extra}")).unwrap();
    cfg.output.out = Some(dir.to_path_buf());
    cfg
}

#[test]
fn tune_accepts_reference_gains() {
    let dir = TempDir::new().unwrap();
    let out = twisting(&["tune", "--config", &write_config(dir.path(), "")]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("6.527"), "{text}");
}

#[test]
fn tune_rejects_gains_below_a_tighter_deadline() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = twisting(&["tune", "--config", &cfg, "--Ts", "0.9"]);
    assert_eq!(out.status.code(), Some(EXIT_VERIFICATION.into()));
}

#[test]
fn missing_parameter_is_a_config_error() {
    let out = twisting(&[
        "tune", "--beta", "5", "--rho", "0.5", "--delta", "3.1", "--N", "0.2", "--Ts", "1",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG.into()));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R required"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = twisting(&[
        "tune",
        "--config",
        &write_config(dir.path(), "[sim]\nstep = 1e-5\n"),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG.into()));
}

#[test]
fn tune_synthesizes_gains_when_none_given() {
    let out = twisting(&[
        "tune", "--R", "2", "--beta", "5", "--rho", "0.5", "--delta", "3.1", "--N", "0.2", "--Ts",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("6.593"));
}

#[test]
fn exit_codes_are_distinct() {
    assert_ne!(EXIT_CONFIG, EXIT_VERIFICATION);
    assert_ne!(EXIT_CONFIG, EXIT_NUMERICAL);
    assert_ne!(EXIT_VERIFICATION, EXIT_NUMERICAL);
    assert!([EXIT_CONFIG, EXIT_VERIFICATION, EXIT_NUMERICAL]
        .iter()
        .all(|&c| c != 0));
}

#[test]
fn simulate_settles_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = config_in(dir.path(), "[sim]\nx1_0 = 0.0\nx2_0 = 1.6\nt_end = 2.0\n");
    let outcome = cmd_simulate(&cfg, &mut Vec::new()).unwrap();
    let t = outcome.settle_time.expect("settles");
    assert!(t <= 1.0, "settled at {t}");
    let back = read_samples_csv(fs::File::open(&outcome.csv).unwrap()).unwrap();
    assert_eq!(back, outcome.trajectory.samples);
    assert_eq!(back[0].t, 0.0);
    assert_eq!((back[0].x1, back[0].x2), (0.0, 1.6));
}

#[test]
fn simulate_rejects_zero_gains() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out_dir = dir.path().join("out");
    let out = twisting(&[
        "simulate",
        "--config",
        &cfg,
        "--mu1",
        "0",
        "--mu2",
        "0",
        "--x1-0",
        "0",
        "--x2-0",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG.into()));
    assert!(!out_dir.join("trajectory.csv").exists());
}

#[test]
fn simulate_needs_an_initial_state() {
    let dir = TempDir::new().unwrap();
    let out = twisting(&["simulate", "--config", &write_config(dir.path(), "")]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG.into()));
}

#[test]
fn verify_passes_boundary_and_interior_campaign() {
    let dir = TempDir::new().unwrap();
    let cfg = config_in(
        dir.path(),
        "[campaign]\nboundary_count = 100\ninterior_count = 50\nseed = 7\n",
    );
    let report = cmd_verify(&cfg, &mut Vec::new()).unwrap();
    assert_eq!(report.cases.len(), 750);
    assert!(report.passed(), "{}", report.summary());
    let csv = fs::read_to_string(dir.path().join("campaign.csv")).unwrap();
    assert_eq!(csv.lines().count(), 751);
    assert!(dir.path().join("campaign_summary.txt").exists());
}

#[test]
fn verify_rejects_amplitude_above_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = twisting(&[
        "verify",
        "--config",
        &cfg,
        "--kind",
        "constant",
        "--amplitude",
        "0.4",
        "--boundary-count",
        "4",
        "--out",
        dir.path().join("v").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG.into()));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}

#[test]
fn verify_rejects_campaign_profile_above_bound() {
    let dir = TempDir::new().unwrap();
    let cfg = config_in(
        dir.path(),
        "[campaign]\nboundary_count = 4\n[[campaign.profiles]]\nkind = \"sinusoid\"\namplitude = 0.4\n",
    );
    let err = cmd_verify(&cfg, &mut Vec::new()).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn verify_seed_changes_rows_not_verdict() {
    let run = |seed: u64| {
        let dir = TempDir::new().unwrap();
        let cfg = config_in(
            dir.path(),
            &format!("[campaign]\nboundary_count = 12\nseed = {seed}\n"),
        );
        let report = cmd_verify(&cfg, &mut Vec::new()).unwrap();
        (
            report.passed(),
            fs::read_to_string(dir.path().join("campaign.csv")).unwrap(),
        )
    };
    let (pass_a, rows_a) = run(1);
    let (pass_b, rows_b) = run(2);
    assert!(pass_a && pass_b);
    assert_ne!(rows_a, rows_b);
}

#[test]
fn verify_refuses_gains_too_weak_for_deadline() {
    let dir = TempDir::new().unwrap();
    let mut cfg = config_in(dir.path(), "[campaign]\nboundary_count = 8\n");
    cfg.params.settling_time = Some(0.9);
    let err = cmd_verify(&cfg, &mut Vec::new()).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(!dir.path().join("campaign.csv").exists());
}

#[test]
fn demo_pendulum_reproduces_lab_runs() {
    let dir = TempDir::new().unwrap();
    let mut cfg = RunConfig::default();
    cfg.output.out = Some(dir.path().to_path_buf());
    let demo = cmd_demo_pendulum(&cfg, &mut Vec::new()).unwrap();
    for t in demo.settle_times {
        let t = t.expect("settles");
        assert!(t <= 1.0, "settled at {t}");
    }
    for v in demo.max_v_after_entry {
        assert!(v.unwrap() <= 2.0);
    }
    assert!(demo.equivalence_error <= 1e-9);
    let g = GainsF64::new(6.63, 33.24);
    assert!(demo
        .boundary
        .iter()
        .all(|s| (lyapunov(s, &g) - 2.0).abs() <= 1e-12));
    for name in [
        "pendulum_ic1.csv",
        "double_integrator_ic1.csv",
        "pendulum_ic2.csv",
        "level_set_boundary.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
}

#[test]
fn demo_pendulum_binary_runs() {
    let dir = TempDir::new().unwrap();
    let out = twisting(&["demo-pendulum", "--out", dir.path().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("max deviation"));
}
