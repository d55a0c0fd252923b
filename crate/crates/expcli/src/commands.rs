//! The four experiment commands: bounds, run, threshold, sweep.

use crate::config::{EtaKind, ExperimentConfig, SystemKind};
use crate::output::{
    gnuplot_script, write_bounds_csv, write_contraction_csv, write_sweep_csv, write_threshold_csv,
    CellOutcome, CellRow, SummaryRow, ThresholdReportRow,
};
use crate::runner::{
    lorenz_eta, lorenz_setup, meta_base, nse_eta, nse_setup, run_config, schedule_for_seed,
};
use crate::AppError;
use dda_core::dda::{
    run, threshold_search, write_error_series_csv, ErrorSeries, ThresholdConfig, Verdict,
};
use dda_core::lorenz::{self, LorenzParams, LorenzState};
use dda_core::nse2d::{self, NseSolver};
use rayon::prelude::*;
use std::fs;
use std::path::Path;
use std::sync::Arc;

fn create_out(out: &Path) -> Result<(), AppError> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn print_bound(name: &str, value: f64, formula: &str) {
    println!("{name:>22} = {value:<24} [{formula}]");
}

/// Evaluate and report every analytic constant for the configured system.
pub fn cmd_bounds(cfg: &ExperimentConfig, out: &Path) -> Result<(), AppError> {
    create_out(out)?;
    let mut meta = meta_base(cfg, cfg.integrator.dt);
    meta.insert("schema".into(), "bounds-v1".into());
    match cfg.experiment.system {
        SystemKind::Lorenz => {
            let l = cfg.lorenz.clone().unwrap_or_default();
            let p = LorenzParams {
                sigma: l.sigma,
                b: l.b,
                r: l.r,
            };
            let eta_norm = match cfg.eta.kind {
                EtaKind::Zero => 0.0,
                EtaKind::Random => cfg.eta.norm,
            };
            let eta_state = LorenzState::new(0.0, eta_norm, 0.0);
            let h = cfg.schedule.h.unwrap_or(1.0);
            let b = lorenz::bounds(&p, &eta_state, h)?;

            let rows: Vec<(&str, f64, &str)> = vec![
                ("K", b.k, "K = b^2 (r+sigma)^2 / (4 (b-1)); |U(t)|^2 <= K on the attractor"),
                ("beta", b.beta, "beta = 2 (sqrt(K) - 1); |delta|^2 growth rate between updates"),
                ("t_star", b.t_star, "root of M(t) = 1; M(h) < 1 for h in (0, t_star)"),
                ("R", b.r_init, "R = 2 (K + |eta|^2); bound on |delta(t_0)|^2"),
                (
                    "M1",
                    b.m1,
                    "M1 = |eta|^2 + C1 + K + |f|^2, C1 = K e^-h + |f|^2 (1 - e^-h); |u|^2 <= M1/(1 - e^-h)",
                ),
                ("M2", b.m2, "M2 = C1 + K + |f|^2; limsup |u|^2 <= M2/(1 - e^-h)"),
                (
                    "M3",
                    b.m3,
                    "M3 = |eta|^2 + 3 K (doubled decay rate); |u|^2 <= M3/(1 - e^-2h)",
                ),
                (
                    "M4",
                    b.m4,
                    "M4 = max(sqrt(K) + sqrt(R), sqrt(M1 / (1 - e^-t_star))); |u| <= M4 for any h",
                ),
            ];
            for (n, v, f) in &rows {
                print_bound(n, *v, f);
            }
            let mut fb = fs::File::create(out.join("bounds.csv"))?;
            write_bounds_csv(&mut fb, &meta, &rows)?;

            let samples: Vec<(f64, f64, Option<f64>)> = (0..=50)
                .map(|i| {
                    let tau = 2.5 * b.t_star * i as f64 / 50.0;
                    (tau, lorenz::contraction_m(&p, tau).unwrap(), None)
                })
                .collect();
            let mut fc = fs::File::create(out.join("contraction.csv"))?;
            write_contraction_csv(&mut fc, &meta, &samples)?;
        }
        SystemKind::Nse2d => {
            let setup_section = cfg.nse2d.clone().unwrap_or_default();
            let grid = nse2d::FourierGrid::new(setup_section.n, setup_section.box_size)?;
            let forcing = nse2d::band_forcing(
                &grid,
                setup_section.forcing_amplitude,
                setup_section.forcing_band[0],
                setup_section.forcing_band[1],
            );
            let params = nse2d::NseParams::new(grid.clone(), setup_section.nu, forcing)?;
            let lambda = cfg.observation.lambda.unwrap();
            let eta_norm = match cfg.eta.kind {
                EtaKind::Zero => 0.0,
                EtaKind::Random => cfg.eta.norm,
            };
            let f_l2 = nse2d::norms(&grid, &params.forcing).l2;
            let k = f_l2 * f_l2 / (grid.lambda_1() * setup_section.nu * setup_section.nu);
            let r = (k.sqrt() + eta_norm).powi(2);
            let b = nse2d::bounds(&params, lambda, r, setup_section.c)?;

            let rows: Vec<(&str, f64, &str)> = vec![
                ("lambda1", b.lambda1, "lambda1 = (2 pi / L)^2; smallest eigenvalue of A"),
                ("|f|", b.f_l2, "L^2 norm of the forcing"),
                ("K", b.k, "K = |f|^2 / (lambda1 nu^2); ||U||^2 <= K on the attractor"),
                ("c", b.c, "configured interpolation constant"),
                ("C1", b.c1, "C1 = 3 5^(5/3) 2^(-16/3) c^(8/3)"),
                ("C2", b.c2, "C2 = 2^(5/4) c^2"),
                ("C3", b.c3, "C3 = 3 5^(5/3) 2^(-10/3) c^(8/3)"),
                (
                    "beta",
                    b.beta,
                    "beta = 2 C1 nu^(-5/3) lambda1^(-1/3) K^(4/3); ||delta||^2 growth rate",
                ),
                ("R", b.r, "bound on ||delta(t_0)||^2"),
                (
                    "lambda_min_one_step",
                    b.lambda_min_one_step,
                    "lambda > c^2 K / nu^2 gives a one-step error decrease",
                ),
                (
                    "lambda_min_uniform",
                    b.lambda_min_uniform,
                    "lambda > 9 lambda1^(-1/3) ((2 c sqrt(K) + c sqrt(R)) / nu)^(8/3) gives a contractive window",
                ),
                (
                    "lambda_min_eta0",
                    b.lambda_min_eta0,
                    "lambda > 9 lambda1^(-5/3) (3 c |f| / nu^2)^(8/3); the uniform threshold at eta = 0",
                ),
                ("M5", b.m5(eta_norm), "M5 = ||eta||^2 + 3 K; ||u||^2 <= M5/(1 - e^(-nu lambda1 h))"),
            ];
            for (n, v, f) in &rows {
                print_bound(n, *v, f);
            }
            match b.t_star {
                Some(ts) => print_bound("t_star", ts, "root of M(t) = 1 at this lambda"),
                None => println!(
                    "{:>22} = none                  [M'(0) >= 0 at this lambda: no contractive window]",
                    "t_star"
                ),
            }
            let mut rows_csv = rows.clone();
            if let Some(ts) = b.t_star {
                rows_csv.push(("t_star", ts, "root of M(t) = 1 at this lambda"));
            }
            let mut fb = fs::File::create(out.join("bounds.csv"))?;
            write_bounds_csv(&mut fb, &meta, &rows_csv)?;

            let tau_max = b
                .t_star
                .map(|ts| 2.0 * ts)
                .unwrap_or(2.0 / (b.nu * b.lambda));
            let samples: Vec<(f64, f64, Option<f64>)> = (0..=50)
                .map(|i| {
                    let tau = tau_max * i as f64 / 50.0;
                    (
                        tau,
                        nse2d::contraction_m_nse(&b, tau),
                        Some(nse2d::majorant_m(&b, tau)),
                    )
                })
                .collect();
            let mut fc = fs::File::create(out.join("contraction.csv"))?;
            write_contraction_csv(&mut fc, &meta, &samples)?;
        }
    }
    Ok(())
}

fn print_series_summary(series: &ErrorSeries) {
    println!(
        "verdict: {}  initial error: {:e}  final error: {:e}  reduction: {:e}",
        series.verdict,
        series.initial_err(),
        series.final_err(),
        series.reduction()
    );
    if let Some(t) = series.blowup_t {
        println!("blow-up at t = {t}");
    }
}

/// One assimilation run; writes series.csv and a gnuplot script, plus the
/// norm series and an initial-state snapshot for the spectral system.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<(), AppError> {
    create_out(out)?;
    let blowup;
    match cfg.experiment.system {
        SystemKind::Lorenz => {
            let setup = lorenz_setup(cfg, 1)?;
            let schedule = schedule_for_seed(cfg, 0, None)?;
            let eta = lorenz_eta(cfg, 0, &setup.obs);
            let mut meta = meta_base(cfg, setup.stepper.dt);
            meta.insert("schema".into(), "series-v1".into());
            meta.insert("seed".into(), "0".into());
            let rc = run_config(cfg, setup.stepper, meta);
            let mut sys = setup.system();
            let series = run(&mut sys, &setup.refs[0], &setup.obs, &schedule, &eta, &rc)?;
            let mut f = fs::File::create(out.join("series.csv"))?;
            write_error_series_csv(&mut f, &series)?;
            fs::write(out.join("plot_series.gnuplot"), gnuplot_script(false))?;
            print_series_summary(&series);
            blowup = series.blowup_t;
        }
        SystemKind::Nse2d => {
            let setup = nse_setup(cfg, 1)?;
            let schedule = schedule_for_seed(cfg, 0, None)?;
            let eta = nse_eta(cfg, 0, &setup.params.grid, &setup.obs);
            let mut meta = meta_base(cfg, setup.stepper.dt);
            meta.insert("schema".into(), "series-v1".into());
            meta.insert("seed".into(), "0".into());
            let rc = run_config(cfg, setup.stepper, meta.clone());
            let mut solver = NseSolver::new(setup.params.clone());
            let series = run(
                &mut solver,
                &setup.refs[0],
                &setup.obs,
                &schedule,
                &eta,
                &rc,
            )?;
            let mut f = fs::File::create(out.join("series.csv"))?;
            write_error_series_csv(&mut f, &series)?;
            fs::write(out.join("plot_series.gnuplot"), gnuplot_script(true))?;

            // reference norm series and a snapshot of the reference state
            let ns = nse2d::norm_series(
                &mut solver,
                &setup.refs[0],
                0.0,
                cfg.experiment.horizon,
                &setup.stepper,
                10,
            )?;
            let mut fnorm = fs::File::create(out.join("norms.csv"))?;
            nse2d::write_norm_series_csv(&mut fnorm, &meta, &ns)?;
            let header = nse2d::SnapshotHeader {
                n: setup.params.grid.n() as u32,
                l: setup.params.grid.l(),
                nu: setup.params.nu,
                t: 0.0,
            };
            let mut fsnap = fs::File::create(out.join("reference.nse2dsnp"))?;
            nse2d::write_snapshot(&mut fsnap, &header, &setup.refs[0])?;
            print_series_summary(&series);
            blowup = series.blowup_t;
        }
    }
    if let Some(t) = blowup {
        return Err(AppError::Runtime(format!(
            "approximating solution blew up at t = {t}"
        )));
    }
    Ok(())
}

/// Bisection for the empirical critical update interval.
pub fn cmd_threshold(cfg: &ExperimentConfig, out: &Path) -> Result<(), AppError> {
    let section = cfg
        .threshold
        .clone()
        .ok_or_else(|| AppError::Config("threshold: section required for this command".into()))?;
    create_out(out)?;
    let seeds = cfg.experiment.seed_count;
    let mut meta = meta_base(cfg, cfg.integrator.dt);
    meta.insert("schema".into(), "threshold-v1".into());

    let bracket = match cfg.experiment.system {
        SystemKind::Lorenz => {
            let setup = lorenz_setup(cfg, seeds)?;
            let tc = ThresholdConfig {
                resolution: section.resolution,
                horizon: cfg.experiment.horizon,
                run: run_config(cfg, setup.stepper, meta.clone()),
            };
            let mut sys = setup.system();
            threshold_search(
                &mut sys,
                &setup.refs,
                &setup.obs,
                section.h_lo,
                section.h_hi,
                &tc,
            )?
        }
        SystemKind::Nse2d => {
            let setup = nse_setup(cfg, seeds)?;
            let tc = ThresholdConfig {
                resolution: section.resolution,
                horizon: cfg.experiment.horizon,
                run: run_config(cfg, setup.stepper, meta.clone()),
            };
            let mut solver = NseSolver::new(setup.params.clone());
            threshold_search(
                &mut solver,
                &setup.refs,
                &setup.obs,
                section.h_lo,
                section.h_hi,
                &tc,
            )?
        }
    };

    let probes: Vec<ThresholdReportRow> = bracket
        .probes
        .iter()
        .map(|p| ThresholdReportRow {
            h: p.h,
            converged: p.converged,
            total: p.total,
        })
        .collect();
    let mut f = fs::File::create(out.join("threshold.csv"))?;
    write_threshold_csv(&mut f, &meta, &probes, (bracket.h_conv, bracket.h_div))?;
    println!(
        "critical update interval bracket: [{}, {}] ({} probes, {} seeds each)",
        bracket.h_conv,
        bracket.h_div,
        probes.len(),
        seeds
    );
    Ok(())
}

struct JobResult {
    hi: usize,
    li: usize,
    seed: usize,
    row: CellRow,
}

/// (h, lambda) grid of assimilation runs with a majority verdict per cell.
/// Cells run on a worker pool; output order is deterministic (sorted by
/// cell key, then seed). Per-cell failures are recorded and the sweep
/// continues.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<(), AppError> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| AppError::Config("sweep: section required for this command".into()))?;
    create_out(out)?;
    let seeds = cfg.experiment.seed_count;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::Runtime(e.to_string()))?;

    let lambdas: Vec<Option<f64>> = match cfg.experiment.system {
        SystemKind::Lorenz => vec![None],
        SystemKind::Nse2d => sweep.lambda_values.iter().copied().map(Some).collect(),
    };

    let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
    for hi in 0..sweep.h_values.len() {
        for li in 0..lambdas.len() {
            for seed in 0..seeds {
                jobs.push((hi, li, seed));
            }
        }
    }

    let mut results: Vec<JobResult> = match cfg.experiment.system {
        SystemKind::Lorenz => {
            let setup = Arc::new(lorenz_setup(cfg, seeds)?);
            pool.install(|| {
                jobs.par_iter()
                    .map(|&(hi, li, seed)| {
                        let h = sweep.h_values[hi];
                        let outcome = (|| -> Result<CellOutcome, AppError> {
                            let schedule = schedule_for_seed(cfg, seed, Some(h))?;
                            let eta = lorenz_eta(cfg, seed, &setup.obs);
                            let rc = run_config(cfg, setup.stepper, Default::default());
                            let mut sys = setup.system();
                            let series = run(
                                &mut sys,
                                &setup.refs[seed],
                                &setup.obs,
                                &schedule,
                                &eta,
                                &rc,
                            )?;
                            Ok(done_outcome(&series, cfg.verdict.tol_rel))
                        })()
                        .unwrap_or_else(|e| CellOutcome::Failed {
                            message: e.to_string(),
                        });
                        JobResult {
                            hi,
                            li,
                            seed,
                            row: CellRow {
                                h,
                                lambda: None,
                                seed,
                                outcome,
                            },
                        }
                    })
                    .collect()
            })
        }
        SystemKind::Nse2d => {
            let setup = Arc::new(nse_setup(cfg, seeds)?);
            pool.install(|| {
                jobs.par_iter()
                    .map(|&(hi, li, seed)| {
                        let h = sweep.h_values[hi];
                        let lambda = lambdas[li].unwrap();
                        let outcome = (|| -> Result<CellOutcome, AppError> {
                            let schedule = schedule_for_seed(cfg, seed, Some(h))?;
                            let obs = nse2d::proj_lambda(&setup.params.grid, lambda);
                            let eta = nse_eta(cfg, seed, &setup.params.grid, &obs);
                            let rc = run_config(cfg, setup.stepper, Default::default());
                            let mut solver = NseSolver::new(setup.params.clone());
                            let series =
                                run(&mut solver, &setup.refs[seed], &obs, &schedule, &eta, &rc)?;
                            Ok(done_outcome(&series, cfg.verdict.tol_rel))
                        })()
                        .unwrap_or_else(|e| CellOutcome::Failed {
                            message: e.to_string(),
                        });
                        JobResult {
                            hi,
                            li,
                            seed,
                            row: CellRow {
                                h,
                                lambda: lambdas[li],
                                seed,
                                outcome,
                            },
                        }
                    })
                    .collect()
            })
        }
    };
    results.sort_by_key(|r| (r.hi, r.li, r.seed));

    // majority verdicts per cell
    let mut summaries: Vec<SummaryRow> = Vec::new();
    let mut majority: Vec<Vec<Option<Verdict>>> =
        vec![vec![None; lambdas.len()]; sweep.h_values.len()];
    for hi in 0..sweep.h_values.len() {
        for li in 0..lambdas.len() {
            let cell: Vec<&JobResult> = results
                .iter()
                .filter(|r| r.hi == hi && r.li == li)
                .collect();
            let count = |v: Verdict| {
                cell.iter()
                    .filter(|r| matches!(&r.row.outcome, CellOutcome::Done { verdict, .. } if *verdict == v))
                    .count()
            };
            let conv = count(Verdict::Converged);
            let div = count(Verdict::Diverged);
            let total = cell.len();
            let label = if 2 * conv > total {
                majority[hi][li] = Some(Verdict::Converged);
                "converged"
            } else if 2 * div > total {
                majority[hi][li] = Some(Verdict::Diverged);
                "diverged"
            } else {
                majority[hi][li] = Some(Verdict::Undecided);
                "undecided"
            };
            summaries.push(SummaryRow {
                h: sweep.h_values[hi],
                lambda: lambdas[li],
                majority: label.into(),
                converged: conv,
                total,
                note: String::new(),
            });
        }
    }

    // anomaly scan: raising lambda at fixed h, or lowering h at fixed
    // lambda, must not flip a majority verdict from converged to diverged
    for s in summaries.iter_mut() {
        let hi = sweep.h_values.iter().position(|&h| h == s.h).unwrap();
        let li = lambdas.iter().position(|&l| l == s.lambda).unwrap();
        let mut notes = Vec::new();
        if li > 0
            && majority[hi][li] == Some(Verdict::Diverged)
            && majority[hi][li - 1] == Some(Verdict::Converged)
        {
            notes.push("anomaly:verdict-flips-with-higher-lambda");
        }
        if hi > 0
            && majority[hi][li] == Some(Verdict::Converged)
            && majority[hi - 1][li] == Some(Verdict::Diverged)
        {
            notes.push("anomaly:verdict-flips-with-lower-h");
        }
        if !notes.is_empty() {
            s.note = notes.join(";");
            eprintln!(
                "sweep anomaly at h = {}, lambda = {:?}: {}",
                s.h, s.lambda, s.note
            );
        }
    }

    let mut meta = meta_base(cfg, cfg.integrator.dt);
    meta.insert("schema".into(), "sweep-v1".into());
    let rows: Vec<CellRow> = results.into_iter().map(|r| r.row).collect();
    let mut f = fs::File::create(out.join("sweep.csv"))?;
    write_sweep_csv(&mut f, &meta, &rows, &summaries)?;
    for s in &summaries {
        println!(
            "h = {:<8} lambda = {:<8} majority = {:<10} ({} / {} converged){}",
            s.h,
            s.lambda
                .map(|l| l.to_string())
                .unwrap_or_else(|| "-".into()),
            s.majority,
            s.converged,
            s.total,
            if s.note.is_empty() {
                String::new()
            } else {
                format!("  [{}]", s.note)
            }
        );
    }
    Ok(())
}

fn done_outcome(series: &ErrorSeries, tol_rel: f64) -> CellOutcome {
    CellOutcome::Done {
        verdict: series.verdict,
        err_initial: series.initial_err(),
        err_final: series.final_err(),
        reduction: series.reduction(),
        updates_to_converge: series.updates_to_converge(tol_rel),
    }
}
