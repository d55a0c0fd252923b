//! End-to-end checks of the experiment commands and the binary: files are
//! written where promised, parse back, embed their configuration, and are
//! byte-identical across re-runs.

use expcli::commands::{cmd_bounds, cmd_run, cmd_sweep, cmd_threshold};
use expcli::config::ExperimentConfig;
use std::fs;
use std::process::Command;

fn lorenz_run_toml() -> String {
    r#"
[experiment]
system = "lorenz"
horizon = 60.0
seed_count = 3

[lorenz]
spinup = 30.0

[schedule]
kind = "uniform"
h = 0.1

[integrator]
scheme = "rk4"
dt = 0.001
"#
    .to_string()
}

fn nse_small_toml() -> String {
    r#"
[experiment]
system = "nse2d"
horizon = 40.0
seed_count = 2

[nse2d]
n = 16
spinup = 30.0
seed_spacing = 5.0

[observation]
lambda = 4.0

[schedule]
kind = "uniform"
h = 0.25

[integrator]
scheme = "ifrk4"
dt = 0.02

[sweep]
h_values = [0.5, 0.25]
lambda_values = [0.5, 4.0]
"#
    .to_string()
}

#[test]
fn run_writes_series_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&lorenz_run_toml()).unwrap();
    cmd_run(&cfg, dir.path()).unwrap();

    let series = fs::read(dir.path().join("series.csv")).unwrap();
    let (meta, samples) = dda_core::dda::read_error_series_csv(&series[..]).unwrap();
    assert!(samples.len() > 100);
    assert_eq!(
        meta.get("cfg.experiment.system").map(String::as_str),
        Some("\"lorenz\"")
    );
    assert_eq!(
        meta.get("code_version").map(String::as_str),
        Some(expcli::CODE_VERSION)
    );
    assert_eq!(meta.get("verdict").map(String::as_str), Some("converged"));

    let plot = fs::read_to_string(dir.path().join("plot_series.gnuplot")).unwrap();
    assert!(plot.contains("series.csv"));
    assert!(plot.contains("logscale"));
}

#[test]
fn rerun_is_byte_identical() {
    let cfg = ExperimentConfig::from_toml(&lorenz_run_toml()).unwrap();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    cmd_run(&cfg, dir_a.path()).unwrap();
    cmd_run(&cfg, dir_b.path()).unwrap();
    let a = fs::read(dir_a.path().join("series.csv")).unwrap();
    let b = fs::read(dir_b.path().join("series.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bounds_reports_lorenz_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&lorenz_run_toml()).unwrap();
    cmd_bounds(&cfg, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let k_line = text.lines().find(|l| l.starts_with("K,")).unwrap();
    let k: f64 = k_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((k - 92416.0 / 60.0).abs() < 1e-9);
    let ts_line = text.lines().find(|l| l.starts_with("t_star,")).unwrap();
    let ts: f64 = ts_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((ts - 0.000129).abs() < 0.05 * 0.000129);
    assert!(dir.path().join("contraction.csv").exists());
}

#[test]
fn bounds_reports_nse_constants() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml(&nse_small_toml()).unwrap();
    cfg.observation.lambda = Some(16.0);
    cmd_bounds(&cfg, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    let k_line = text.lines().find(|l| l.starts_with("K,")).unwrap();
    let k: f64 = k_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((k - 100.0).abs() < 1e-9, "K = {k}");
    assert!(text.lines().any(|l| l.starts_with("lambda_min_eta0,")));
    let contraction = fs::read_to_string(dir.path().join("contraction.csv")).unwrap();
    assert!(contraction.lines().any(|l| l == "tau,contraction,majorant"));
}

#[test]
fn sweep_grid_has_cells_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&nse_small_toml()).unwrap();
    cmd_sweep(&cfg, dir.path(), 2).unwrap();
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let cells = text.lines().filter(|l| l.starts_with("cell,")).count();
    let summaries = text.lines().filter(|l| l.starts_with("summary,")).count();
    assert_eq!(cells, 2 * 2 * 2); // h x lambda x seeds
    assert_eq!(summaries, 2 * 2);
    // the high-resolution cells at lambda = 4 should reach consensus
    let lam4: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("summary,") && l.contains(",4,"))
        .collect();
    assert!(!lam4.is_empty());
    for line in lam4 {
        assert!(
            line.contains("converged"),
            "expected convergence at lambda 4: {line}"
        );
    }
}

#[test]
fn threshold_brackets_lorenz_critical_interval_coarsely() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml(&lorenz_run_toml()).unwrap();
    cfg.experiment.seed_count = 3;
    cfg.experiment.horizon = 80.0;
    cfg.threshold = Some(expcli::config::ThresholdSection {
        h_lo: 0.05,
        h_hi: 0.5,
        resolution: Some(0.12),
    });
    cmd_threshold(&cfg, dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("threshold.csv")).unwrap();
    let low: f64 = text
        .lines()
        .find(|l| l.starts_with("bracket_low,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let high: f64 = text
        .lines()
        .find(|l| l.starts_with("bracket_high,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(low < high && high - low <= 0.12 + 1e-12);
    assert!(low >= 0.05 && high <= 0.5);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_expcli");

    // missing config file: I/O error
    let st = Command::new(exe)
        .args([
            "bounds",
            "--config",
            "/nonexistent/nope.toml",
            "--out",
            "/tmp/unused",
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));

    // invalid config: config error
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        lorenz_run_toml().replace("[lorenz]", "[lorenz]\nb = 1.0"),
    )
    .unwrap();
    let st = Command::new(exe)
        .args([
            "bounds",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));

    // valid bounds run: success
    let good = dir.path().join("good.toml");
    fs::write(&good, lorenz_run_toml()).unwrap();
    let st = Command::new(exe)
        .args([
            "bounds",
            "--config",
            good.to_str().unwrap(),
            "--out",
            dir.path().join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));

    // missing out dir: config error
    let st = Command::new(exe)
        .args(["bounds", "--config", good.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1));

    // threshold bracket with no sign change: runtime error
    let bad_bracket = dir.path().join("bad_bracket.toml");
    let mut text = lorenz_run_toml();
    text.push_str("\n[threshold]\nh_lo = 0.3\nh_hi = 0.5\n");
    text = text.replace("horizon = 60.0", "horizon = 40.0");
    fs::write(&bad_bracket, text).unwrap();
    let st = Command::new(exe)
        .args([
            "threshold",
            "--config",
            bad_bracket.to_str().unwrap(),
            "--out",
            dir.path().join("out2").to_str().unwrap(),
            "--seed-count",
            "3",
        ])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn nse_run_emits_norms_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(&nse_small_toml()).unwrap();
    cmd_run(&cfg, dir.path()).unwrap();
    let series = fs::read(dir.path().join("series.csv")).unwrap();
    let (_, samples) = dda_core::dda::read_error_series_csv(&series[..]).unwrap();
    assert!(samples.iter().all(|s| s.err_h1.is_some()));

    assert!(dir.path().join("norms.csv").exists());
    let snap = fs::read(dir.path().join("reference.nse2dsnp")).unwrap();
    let (header, field) = dda_core::nse2d::read_snapshot(&mut snap.as_slice()).unwrap();
    assert_eq!(header.n, 16);
    assert_eq!(field.n(), 16);
}
