//! Glue between the configuration and the library: builds systems,
//! reference states, initial guesses and schedules, all deterministically
//! seeded from `experiment.base_seed`.

use crate::config::{EtaKind, ExperimentConfig, ScheduleKind, SchemeKind};
use crate::{AppError, CODE_VERSION};
use dda_core::dda::{InitialGuess, RunConfig, RunMeta, Schedule};
use dda_core::integrators::{Scheme, StateOps, StepperConfig};
use dda_core::lorenz::{self, ComponentMask, LorenzParams, LorenzState, LorenzSystem};
use dda_core::nse2d::{
    self, band_forcing, norms, proj_lambda, random_div_free, FourierGrid, NseParams, NseSolver,
    SpectralProjection, SpectralVelocity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SALT_INIT_FIELD: u64 = 0x1;
const SALT_ETA: u64 = 0x2000;
const SALT_SCHEDULE: u64 = 0x3000;

pub fn scheme_of(cfg: &ExperimentConfig) -> Scheme {
    match cfg.integrator.scheme {
        SchemeKind::Rk4 => Scheme::Rk4,
        SchemeKind::Ifrk4 => Scheme::IfRk4,
    }
}

/// Common run metadata: the flattened config, the code version and the
/// effective integrator step.
pub fn meta_base(cfg: &ExperimentConfig, dt_effective: f64) -> RunMeta {
    let mut meta = RunMeta::new();
    for (k, v) in cfg.flatten() {
        meta.insert(format!("cfg.{k}"), v);
    }
    meta.insert("code_version".into(), CODE_VERSION.to_string());
    meta.insert("dt_effective".into(), format!("{dt_effective}"));
    meta
}

pub struct LorenzSetup {
    pub params: LorenzParams,
    pub obs: ComponentMask,
    pub refs: Vec<LorenzState>,
    pub stepper: StepperConfig,
}

impl LorenzSetup {
    pub fn system(&self) -> LorenzSystem {
        LorenzSystem {
            params: self.params,
        }
    }
}

pub fn lorenz_setup(cfg: &ExperimentConfig, seed_count: usize) -> Result<LorenzSetup, AppError> {
    let section = cfg.lorenz.clone().unwrap_or_default();
    let params = LorenzParams {
        sigma: section.sigma,
        b: section.b,
        r: section.r,
    };
    params.validate()?;
    let stepper = StepperConfig {
        scheme: scheme_of(cfg),
        dt: cfg.integrator.dt,
    };
    let refs = lorenz::attractor_samples(
        &params,
        &stepper,
        section.spinup,
        section.seed_spacing,
        seed_count,
    )?;
    let mask = match cfg.observation.component.as_deref() {
        None => lorenz::proj_x(),
        Some(s) => ComponentMask {
            observe: [s.contains('x'), s.contains('y'), s.contains('z')],
        },
    };
    Ok(LorenzSetup {
        params,
        obs: mask,
        refs,
        stepper,
    })
}

pub fn lorenz_eta(
    cfg: &ExperimentConfig,
    seed: usize,
    obs: &ComponentMask,
) -> InitialGuess<LorenzState> {
    match cfg.eta.kind {
        EtaKind::Zero => InitialGuess::zero_like(&LorenzState::zero()),
        EtaKind::Random => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(cfg.experiment.base_seed + SALT_ETA + seed as u64);
            let mut v = LorenzState::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 0.0 {
                v.scale(cfg.eta.norm / n);
            }
            InitialGuess::new(v, obs)
        }
    }
}

pub struct NseSetup {
    pub params: NseParams,
    pub obs: SpectralProjection,
    pub refs: Vec<SpectralVelocity>,
    /// min(configured dt, half the advective limit of the first reference
    /// state); shared by the reference and the approximating solution.
    pub stepper: StepperConfig,
    pub c: f64,
    /// A priori bound on the squared initial error norm fed to the bound
    /// engine: (sqrt(K) + eta_norm)^2.
    pub r_bound: f64,
}

pub fn nse_setup(cfg: &ExperimentConfig, seed_count: usize) -> Result<NseSetup, AppError> {
    let section = cfg.nse2d.clone().unwrap_or_default();
    let grid = FourierGrid::new(section.n, section.box_size)?;
    let forcing = band_forcing(
        &grid,
        section.forcing_amplitude,
        section.forcing_band[0],
        section.forcing_band[1],
    );
    let params = NseParams::new(grid.clone(), section.nu, forcing)?;
    let mut solver = NseSolver::new(params.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.experiment.base_seed + SALT_INIT_FIELD);
    let u_init = random_div_free(&grid, &mut rng, section.init_k_sq_max, section.init_energy);
    let spin_cfg = StepperConfig {
        scheme: scheme_of(cfg),
        dt: cfg.integrator.dt,
    };
    let refs = nse2d::attractor_samples(
        &mut solver,
        &u_init,
        section.spinup,
        section.seed_spacing,
        seed_count,
        &spin_cfg,
    )?;

    let dt_effective = cfg.integrator.dt.min(0.5 * solver.cfl_limit(&refs[0]));
    let stepper = StepperConfig {
        scheme: scheme_of(cfg),
        dt: dt_effective,
    };

    let lambda = cfg.observation.lambda.unwrap_or(0.0);
    let obs = proj_lambda(&grid, lambda);

    let eta_norm = match cfg.eta.kind {
        EtaKind::Zero => 0.0,
        EtaKind::Random => cfg.eta.norm,
    };
    let k = {
        let f_l2 = norms(&grid, &params.forcing).l2;
        f_l2 * f_l2 / (grid.lambda_1() * section.nu * section.nu)
    };
    let r_bound = (k.sqrt() + eta_norm).powi(2);

    Ok(NseSetup {
        params,
        obs,
        refs,
        stepper,
        c: section.c,
        r_bound,
    })
}

pub fn nse_eta(
    cfg: &ExperimentConfig,
    seed: usize,
    grid: &FourierGrid,
    obs: &SpectralProjection,
) -> InitialGuess<SpectralVelocity> {
    match cfg.eta.kind {
        EtaKind::Zero => InitialGuess::zero_like(&SpectralVelocity::zero(grid)),
        EtaKind::Random => {
            let section = cfg.nse2d.clone().unwrap_or_default();
            let mut rng =
                ChaCha8Rng::seed_from_u64(cfg.experiment.base_seed + SALT_ETA + seed as u64);
            let v = random_div_free(grid, &mut rng, section.init_k_sq_max, cfg.eta.norm);
            InitialGuess::new(v, obs)
        }
    }
}

/// The schedule for one seed. Uniform and explicit schedules are shared;
/// random-gap schedules draw independently per seed.
pub fn schedule_for_seed(
    cfg: &ExperimentConfig,
    seed: usize,
    h_override: Option<f64>,
) -> Result<Schedule, AppError> {
    let horizon = cfg.experiment.horizon;
    match cfg.schedule.kind {
        ScheduleKind::Uniform => {
            let h = h_override.or(cfg.schedule.h).unwrap();
            Ok(Schedule::uniform(
                h,
                (horizon / h).ceil().max(1.0) as usize,
            )?)
        }
        ScheduleKind::Random => {
            let h = h_override.or(cfg.schedule.h).unwrap();
            let mut rng =
                ChaCha8Rng::seed_from_u64(cfg.experiment.base_seed + SALT_SCHEDULE + seed as u64);
            Ok(Schedule::random_gaps(h, horizon, &mut rng)?)
        }
        ScheduleKind::Explicit => Ok(Schedule::explicit(cfg.schedule.times.clone().unwrap())?),
    }
}

pub fn run_config(cfg: &ExperimentConfig, stepper: StepperConfig, meta: RunMeta) -> RunConfig {
    RunConfig {
        stepper,
        verdict: dda_core::dda::VerdictConfig {
            tol_rel: cfg.verdict.tol_rel,
            blowup_factor: cfg.verdict.blowup_factor,
            dwell_fraction: cfg.verdict.dwell_fraction,
        },
        substep_stride: if cfg.output.sample_stride == 0 {
            None
        } else {
            Some(cfg.output.sample_stride)
        },
        meta,
    }
}

pub fn out_dir(
    cfg: &ExperimentConfig,
    cli_out: Option<&std::path::Path>,
) -> Result<std::path::PathBuf, AppError> {
    match cli_out {
        Some(p) => Ok(p.to_path_buf()),
        None => match &cfg.experiment.out_dir {
            Some(d) => Ok(std::path::PathBuf::from(d)),
            None => Err(AppError::Config(
                "experiment.out_dir: missing (set it or pass --out)".into(),
            )),
        },
    }
}
