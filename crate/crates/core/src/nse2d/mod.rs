//! 2D incompressible Navier-Stokes on the L-periodic box, pseudospectral
//! with two-thirds dealiasing and integrating-factor RK4 time stepping,
//! plus the observation projection P_lambda and the analytic bound engine
//! for discrete data assimilation.

mod bounds;
mod fft;
mod field;
mod grid;
mod io;
mod solver;

pub use bounds::{
    bounds, contraction_m_nse, g_eval, lambda_for_tstar, majorant_m, majorant_m_prime, t_star_nse,
    NseBounds,
};
pub use field::{
    apply_a, inner_l2, leray_project, norms, proj_lambda, random_dealiased, random_div_free, Norms,
    SpectralProjection, SpectralVelocity,
};
pub use grid::FourierGrid;
pub use io::{
    read_snapshot, write_norm_series_csv, write_snapshot, SnapshotHeader, SNAPSHOT_MAGIC,
    SNAPSHOT_VERSION,
};
pub use solver::{
    attractor_samples, band_forcing, energy_residual, norm_series, spin_up, NseParams, NseSolver,
};

use crate::integrators::IntegrateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NseError {
    #[error("grid size n = {n} must be a power of two and at least 8")]
    GridSize { n: usize },
    #[error("box size l = {l} must be positive and finite")]
    BoxSize { l: f64 },
    #[error("viscosity nu = {nu} must be positive and finite")]
    Viscosity { nu: f64 },
    #[error("field has {field_n} points per dimension but the grid has {grid_n}")]
    ForcingMismatch { field_n: usize, grid_n: usize },
    #[error("bound input {name} = {value} is outside its domain")]
    InvalidBoundInput { name: &'static str, value: f64 },
    #[error("no lambda at or below {limit} gives a contractive majorant for t_star = {t_star}")]
    NoLambdaForTstar { t_star: f64, limit: f64 },
    #[error("bad snapshot: {reason}")]
    BadSnapshot { reason: String },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
