//! Pseudospectral solver for the 2D incompressible Navier-Stokes momentum
//! equation du/dt + nu A u + B(u,u) = f on the periodic box.
//!
//! The nonlinear term B(u,v) = P_H[(u . grad) v] is evaluated by inverse
//! transforming u and grad v, multiplying pointwise, transforming back,
//! applying the two-thirds dealiasing mask and Leray-projecting. With both
//! operands supported inside the mask the pointwise product is free of
//! aliasing, so the retained coefficients carry the exact convolution and
//! the classical orthogonality identities hold to rounding.

use super::fft::Fft2;
use super::field::{
    dealias_in_place, inner_l2, leray_project_in_place, norms, Norms, SpectralVelocity,
};
use super::grid::FourierGrid;
use super::NseError;
use crate::dda::DaSystem;
use crate::integrators::{integrate, OdeSystem, StateOps, StepperConfig};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct NseParams {
    /// Kinematic viscosity.
    pub nu: f64,
    /// Time-independent divergence-free forcing with zero mean.
    pub forcing: SpectralVelocity,
    pub grid: FourierGrid,
}

impl NseParams {
    pub fn new(grid: FourierGrid, nu: f64, forcing: SpectralVelocity) -> Result<Self, NseError> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(NseError::Viscosity { nu });
        }
        if forcing.n() != grid.n() {
            return Err(NseError::ForcingMismatch {
                field_n: forcing.n(),
                grid_n: grid.n(),
            });
        }
        let mut forcing = forcing;
        // forcing lives in H: zero-mean, divergence-free, dealiased
        forcing.symmetrize(&grid);
        leray_project_in_place(&grid, &mut forcing);
        dealias_in_place(&grid, &mut forcing);
        Ok(Self { nu, forcing, grid })
    }
}

/// Deterministic forcing concentrated on the integer-mode band
/// m_lo <= m1^2 + m2^2 <= m_hi, divergence-free by construction and
/// normalized to |f| = amplitude. Mode phases follow a fixed irrational
/// rotation so the forcing is not symmetric under grid reflections.
pub fn band_forcing(
    grid: &FourierGrid,
    amplitude: f64,
    m_sq_lo: i64,
    m_sq_hi: i64,
) -> SpectralVelocity {
    let mut f = SpectralVelocity::zero(grid);
    let nn = grid.n() * grid.n();
    for idx in 0..nn {
        let (m1, m2) = grid.mode(idx);
        let msq = m1 * m1 + m2 * m2;
        if msq < m_sq_lo || msq > m_sq_hi || !grid.dealiased(idx) {
            continue;
        }
        // fill the half-space; the conjugate mode is set explicitly
        if !(m1 > 0 || (m1 == 0 && m2 > 0)) {
            continue;
        }
        let (kx, ky) = grid.wavevector(idx);
        let knorm = (kx * kx + ky * ky).sqrt();
        let (ex, ey) = (-ky / knorm, kx / knorm); // k-perp direction
        let phase =
            2.0 * std::f64::consts::PI * (0.618_033_988_749_895 * (3 * m1 + 7 * m2) as f64).fract();
        let c = Complex64::new(phase.cos(), phase.sin());
        f.ux[idx] = c * ex;
        f.uy[idx] = c * ey;
        let cj = grid.conj_index(idx);
        f.ux[cj] = f.ux[idx].conj();
        f.uy[cj] = f.uy[idx].conj();
    }
    let l2 = norms(grid, &f).l2;
    if l2 > 0.0 {
        f.scale(amplitude / l2);
    }
    f
}

/// One solver instance: owns its transform workspace, so instances are
/// independent and may run concurrently; a single instance must not be
/// stepped from two threads.
pub struct NseSolver {
    params: NseParams,
    fft: Fft2,
    // physical-space scratch
    ph_u1: Vec<f64>,
    ph_u2: Vec<f64>,
    ph_w1: Vec<f64>,
    ph_w2: Vec<f64>,
    cbuf: Vec<Complex64>,
    // per-dt viscous propagator tables
    visc_cache: Vec<(f64, Vec<f64>)>,
}

impl NseSolver {
    pub fn new(params: NseParams) -> Self {
        let n = params.grid.n();
        let nn = n * n;
        Self {
            fft: Fft2::new(n),
            ph_u1: vec![0.0; nn],
            ph_u2: vec![0.0; nn],
            ph_w1: vec![0.0; nn],
            ph_w2: vec![0.0; nn],
            cbuf: vec![Complex64::default(); nn],
            visc_cache: Vec::new(),
            params,
        }
    }

    pub fn params(&self) -> &NseParams {
        &self.params
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.params.grid
    }

    /// Physical-space samples of both velocity components on the N x N grid.
    pub fn physical_components(&mut self, u: &SpectralVelocity) -> (Vec<f64>, Vec<f64>) {
        self.cbuf.copy_from_slice(&u.ux);
        self.fft.inverse(&mut self.cbuf);
        let ux: Vec<f64> = self.cbuf.iter().map(|c| c.re).collect();
        self.cbuf.copy_from_slice(&u.uy);
        self.fft.inverse(&mut self.cbuf);
        let uy: Vec<f64> = self.cbuf.iter().map(|c| c.re).collect();
        (ux, uy)
    }

    /// B(u, v) = P_H[(u . grad) v], dealiased.
    pub fn nonlinear_b(&mut self, u: &SpectralVelocity, v: &SpectralVelocity) -> SpectralVelocity {
        let nn = self.cbuf.len();

        self.cbuf.copy_from_slice(&u.ux);
        self.fft.inverse(&mut self.cbuf);
        for (dst, c) in self.ph_u1.iter_mut().zip(&self.cbuf) {
            *dst = c.re;
        }
        self.cbuf.copy_from_slice(&u.uy);
        self.fft.inverse(&mut self.cbuf);
        for (dst, c) in self.ph_u2.iter_mut().zip(&self.cbuf) {
            *dst = c.re;
        }

        for component in 0..2 {
            let vc = if component == 0 { &v.ux } else { &v.uy };
            // d v_c / dx
            {
                let kx = self.params.grid.kx_flat();
                for idx in 0..nn {
                    self.cbuf[idx] = Complex64::new(0.0, kx[idx]) * vc[idx];
                }
            }
            self.fft.inverse(&mut self.cbuf);
            {
                let w = if component == 0 {
                    &mut self.ph_w1
                } else {
                    &mut self.ph_w2
                };
                for ((dst, a), c) in w.iter_mut().zip(&self.ph_u1).zip(&self.cbuf) {
                    *dst = a * c.re;
                }
            }
            // d v_c / dy
            {
                let ky = self.params.grid.ky_flat();
                for idx in 0..nn {
                    self.cbuf[idx] = Complex64::new(0.0, ky[idx]) * vc[idx];
                }
            }
            self.fft.inverse(&mut self.cbuf);
            {
                let w = if component == 0 {
                    &mut self.ph_w1
                } else {
                    &mut self.ph_w2
                };
                for ((dst, a), c) in w.iter_mut().zip(&self.ph_u2).zip(&self.cbuf) {
                    *dst += a * c.re;
                }
            }
        }

        let mut out = SpectralVelocity::zero(&self.params.grid);
        for (dst, w) in self.cbuf.iter_mut().zip(&self.ph_w1) {
            *dst = Complex64::new(*w, 0.0);
        }
        self.fft.forward(&mut self.cbuf);
        out.ux.copy_from_slice(&self.cbuf);
        for (dst, w) in self.cbuf.iter_mut().zip(&self.ph_w2) {
            *dst = Complex64::new(*w, 0.0);
        }
        self.fft.forward(&mut self.cbuf);
        out.uy.copy_from_slice(&self.cbuf);

        dealias_in_place(&self.params.grid, &mut out);
        leray_project_in_place(&self.params.grid, &mut out);
        out
    }

    /// f - nu A u - B(u, u).
    pub fn rhs(&mut self, u: &SpectralVelocity) -> SpectralVelocity {
        let nu = self.params.nu;
        let mut out = self.nonlinear_b(u, u);
        let ksq = self.params.grid.ksq_flat();
        let f = &self.params.forcing;
        for idx in 0..out.ux.len() {
            let visc = nu * ksq[idx];
            out.ux[idx] = f.ux[idx] - visc * u.ux[idx] - out.ux[idx];
            out.uy[idx] = f.uy[idx] - visc * u.uy[idx] - out.uy[idx];
        }
        out
    }

    /// Advective time-step limit dx / max |u|; infinite for a still field.
    pub fn cfl_limit(&mut self, u: &SpectralVelocity) -> f64 {
        let (u1, u2) = self.physical_components(u);
        let mut vmax = 0.0f64;
        for (a, b) in u1.iter().zip(&u2) {
            vmax = vmax.max((a * a + b * b).sqrt());
        }
        let dx = self.params.grid.l() / self.params.grid.n() as f64;
        if vmax > 0.0 {
            dx / vmax
        } else {
            f64::INFINITY
        }
    }

    fn visc_table(&mut self, dt: f64) -> &[f64] {
        let pos = self.visc_cache.iter().position(|(d, _)| *d == dt);
        let pos = match pos {
            Some(p) => p,
            None => {
                let nu = self.params.nu;
                let table: Vec<f64> = self
                    .params
                    .grid
                    .ksq_flat()
                    .iter()
                    .map(|k2| (-nu * k2 * dt).exp())
                    .collect();
                if self.visc_cache.len() >= 6 {
                    self.visc_cache.remove(0);
                }
                self.visc_cache.push((dt, table));
                self.visc_cache.len() - 1
            }
        };
        &self.visc_cache[pos].1
    }
}

impl OdeSystem for NseSolver {
    type State = SpectralVelocity;

    fn full_rhs(&mut self, s: &SpectralVelocity) -> SpectralVelocity {
        self.rhs(s)
    }

    fn nonstiff_rhs(&mut self, s: &SpectralVelocity) -> SpectralVelocity {
        let mut out = self.nonlinear_b(s, s);
        out.scale(-1.0);
        out.scaled_add(1.0, &self.params.forcing);
        out
    }

    fn stiff_exp(&mut self, s: &mut SpectralVelocity, dt: f64) {
        let table = self.visc_table(dt);
        for (x, e) in s.ux.iter_mut().zip(table) {
            *x *= *e;
        }
        for (x, e) in s.uy.iter_mut().zip(table) {
            *x *= *e;
        }
    }
}

impl DaSystem for NseSolver {
    fn error_norms(
        &self,
        reference: &SpectralVelocity,
        approx: &SpectralVelocity,
    ) -> (f64, Option<f64>) {
        let delta = reference.sub(approx);
        let ns = norms(&self.params.grid, &delta);
        (ns.l2, Some(ns.h1))
    }

    fn monitor_norm(&self, s: &SpectralVelocity) -> f64 {
        norms(&self.params.grid, s).h1
    }
}

/// Integrate from `from` for `t` time units so the reference lands
/// (numerically) on the attractor.
pub fn spin_up(
    solver: &mut NseSolver,
    from: &SpectralVelocity,
    t: f64,
    cfg: &StepperConfig,
) -> Result<SpectralVelocity, NseError> {
    Ok(integrate(solver, from, 0.0, t, cfg)?)
}

/// `count` decorrelated reference states: spin up from `from` for
/// `t_spinup`, then sample every `spacing` time units along the same
/// trajectory.
pub fn attractor_samples(
    solver: &mut NseSolver,
    from: &SpectralVelocity,
    t_spinup: f64,
    spacing: f64,
    count: usize,
    cfg: &StepperConfig,
) -> Result<Vec<SpectralVelocity>, NseError> {
    let mut s = integrate(solver, from, 0.0, t_spinup, cfg)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(s.clone());
        s = integrate(solver, &s, 0.0, spacing, cfg)?;
    }
    Ok(out)
}

/// Norm series of a free (unassimilated) trajectory, sampled every
/// `stride` steps; used for the norm-series CSV export.
pub fn norm_series(
    solver: &mut NseSolver,
    from: &SpectralVelocity,
    t0: f64,
    t1: f64,
    cfg: &StepperConfig,
    stride: usize,
) -> Result<Vec<(f64, Norms)>, NseError> {
    let grid = solver.grid().clone();
    let mut series = vec![(t0, norms(&grid, from))];
    let mut i = 0usize;
    crate::integrators::integrate_observed(solver, from, t0, t1, cfg, |t, s| {
        i += 1;
        if stride == 0 || i % stride == 0 {
            series.push((t, norms(&grid, s)));
        }
    })?;
    Ok(series)
}

/// Energy budget residual d|u|^2/dt + 2 nu ||u||^2 - 2(f, u) at the middle
/// of three consecutive states, with the time derivative replaced by the
/// centered difference. Reported relative to the budget's own scale.
pub fn energy_residual(
    params: &NseParams,
    before: &SpectralVelocity,
    mid: &SpectralVelocity,
    after: &SpectralVelocity,
    dt: f64,
) -> f64 {
    let grid = &params.grid;
    let e_before = norms(grid, before).l2.powi(2);
    let e_after = norms(grid, after).l2.powi(2);
    let dissipation = 2.0 * params.nu * norms(grid, mid).h1.powi(2);
    let input = 2.0 * inner_l2(grid, &params.forcing, mid);
    let dedt = (e_after - e_before) / (2.0 * dt);
    let scale = dissipation
        .abs()
        .max(input.abs())
        .max(dedt.abs())
        .max(1e-300);
    (dedt + dissipation - input).abs() / scale
}
