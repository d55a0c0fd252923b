use clap::{Args, Parser, Subcommand};
use expcli::commands;
use expcli::config::ExperimentConfig;
use expcli::runner::out_dir;
use expcli::AppError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "expcli",
    version,
    about = "Discrete data assimilation experiments: bound reports, runs, threshold searches, parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides experiment.out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size for sweeps (default: available CPUs).
    #[arg(long)]
    workers: Option<usize>,
    /// Override experiment.seed_count.
    #[arg(long)]
    seed_count: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the analytic constants for the configured system.
    Bounds(Common),
    /// One assimilation run: error series CSV and a plot script.
    Run(Common),
    /// Bisect for the empirical critical update interval.
    Threshold(Common),
    /// (h, lambda) grid of runs with majority verdicts.
    Sweep(Common),
}

fn load_config(common: &Common) -> Result<ExperimentConfig, AppError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| AppError::Io(format!("{}: {e}", common.config.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(n) = common.seed_count {
        cfg.experiment.seed_count = n;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn dispatch(cmd: &Cmd) -> Result<(), AppError> {
    let common = match cmd {
        Cmd::Bounds(c) | Cmd::Run(c) | Cmd::Threshold(c) | Cmd::Sweep(c) => c,
    };
    let cfg = load_config(common)?;
    let out = out_dir(&cfg, common.out.as_deref())?;
    match cmd {
        Cmd::Bounds(_) => commands::cmd_bounds(&cfg, &out),
        Cmd::Run(_) => commands::cmd_run(&cfg, &out),
        Cmd::Threshold(_) => commands::cmd_threshold(&cfg, &out),
        Cmd::Sweep(_) => {
            let workers = common.workers.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            });
            commands::cmd_sweep(&cfg, &out, workers)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
