//! The Lorenz system written in bilinear form
//! dU/dt + AU + B(U,U) = f, its X-component observation, and the analytic
//! constants controlling discrete assimilation: the attractor bound K, the
//! inter-observation growth rate beta, the per-window contraction factor
//! M(tau), the critical update interval t*, and the boundedness constants
//! for arbitrarily long update intervals.
//!
//! With U = (X, Y, Z),
//!
//! ```text
//! A = | sigma  -sigma  0 |        f = (0, 0, -b(r+sigma))
//!     | sigma    1     0 |
//!     |   0      0     b |
//!
//! B(U, V) = (0, (X Vz + Z Vx)/2, -(X Vy + Y Vx)/2)
//! ```
//!
//! which reproduces the familiar component form
//! dX/dt = -sigma X + sigma Y, dY/dt = -sigma X - Y - XZ,
//! dZ/dt = -bZ + XY - b(r+sigma); the Z axis is shifted by r+sigma
//! relative to the textbook coordinates so the attractor sits in a ball
//! around the origin.

use crate::analysis::{bisect, RootConfig};
use crate::dda::{DaSystem, ObservationOp};
use crate::integrators::{integrate, IntegrateError, OdeSystem, StateOps, StepperConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LorenzError {
    #[error("b = {b} must exceed 1 (attractor bound has 4(b-1) in its denominator)")]
    BNotAboveOne { b: f64 },
    #[error("sigma = {sigma} must be positive")]
    SigmaNotPositive { sigma: f64 },
    #[error("r = {r} must be positive")]
    RNotPositive { r: f64 },
    #[error("attractor bound K = {k} is below 1, so the growth rate 2(sqrt(K)-1) would be negative; outside the standard regime")]
    KBelowOne { k: f64 },
    #[error("contraction factor never returns to 1 within (0, {limit}]; no critical interval")]
    NoContractionRoot { limit: f64 },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub b: f64,
    pub r: f64,
}

impl LorenzParams {
    /// sigma = 10, b = 8/3, r = 28.
    pub fn standard() -> Self {
        Self {
            sigma: 10.0,
            b: 8.0 / 3.0,
            r: 28.0,
        }
    }

    pub fn validate(&self) -> Result<(), LorenzError> {
        if !(self.sigma > 0.0) {
            return Err(LorenzError::SigmaNotPositive { sigma: self.sigma });
        }
        if !(self.b > 1.0) {
            return Err(LorenzError::BNotAboveOne { b: self.b });
        }
        if !(self.r > 0.0) {
            return Err(LorenzError::RNotPositive { r: self.r });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LorenzState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            z: 0.0,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

impl StateOps for LorenzState {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        self.x += a * other.x;
        self.y += a * other.y;
        self.z += a * other.z;
    }

    fn scale(&mut self, a: f64) {
        self.x *= a;
        self.y *= a;
        self.z *= a;
    }

    fn all_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Symmetrized bilinear term B(u, v).
pub fn bilinear_b(u: &LorenzState, v: &LorenzState) -> LorenzState {
    LorenzState::new(
        0.0,
        0.5 * (u.x * v.z + u.z * v.x),
        -0.5 * (u.x * v.y + u.y * v.x),
    )
}

/// Linear term A u.
pub fn linear_a(p: &LorenzParams, u: &LorenzState) -> LorenzState {
    LorenzState::new(
        p.sigma * u.x - p.sigma * u.y,
        p.sigma * u.x + u.y,
        p.b * u.z,
    )
}

/// Constant forcing f = (0, 0, -b(r+sigma)).
pub fn forcing(p: &LorenzParams) -> LorenzState {
    LorenzState::new(0.0, 0.0, -p.b * (p.r + p.sigma))
}

/// |f|^2 = b^2 (r+sigma)^2.
pub fn forcing_norm_sq(p: &LorenzParams) -> f64 {
    let f = p.b * (p.r + p.sigma);
    f * f
}

/// Right-hand side f - Au - B(u,u) of the bilinear form.
pub fn rhs(p: &LorenzParams, u: &LorenzState) -> LorenzState {
    let au = linear_a(p, u);
    let buu = bilinear_b(u, u);
    let f = forcing(p);
    LorenzState::new(f.x - au.x - buu.x, f.y - au.y - buu.y, f.z - au.z - buu.z)
}

/// Squared attractor radius K = b^2 (r+sigma)^2 / (4(b-1)): every
/// trajectory on the global attractor satisfies |U(t)|^2 <= K.
pub fn attractor_bound_k(p: &LorenzParams) -> Result<f64, LorenzError> {
    p.validate()?;
    Ok(p.b * p.b * (p.r + p.sigma) * (p.r + p.sigma) / (4.0 * (p.b - 1.0)))
}

/// Growth rate beta = 2(sqrt(K) - 1) of |delta|^2 between observations.
/// Rejects K < 1, where the rate would flip sign.
pub fn growth_rate_beta(p: &LorenzParams) -> Result<f64, LorenzError> {
    let k = attractor_bound_k(p)?;
    if k < 1.0 {
        return Err(LorenzError::KBelowOne { k });
    }
    Ok(2.0 * (k.sqrt() - 1.0))
}

fn contraction_m_raw(sigma: f64, k: f64, beta: f64, tau: f64) -> f64 {
    // M(tau) = e^{-tau} (1 + sigma K/(beta+sigma) * [I1(tau) - I2(tau)])
    // I1 = int_0^tau e^{(beta+1)s} ds, I2 = int_0^tau e^{-(sigma-1)s} ds,
    // both in expm1 form; I2 degenerates to tau at sigma = 1.
    let a = beta + 1.0;
    let i1 = (a * tau).exp_m1() / a;
    let i2 = if sigma == 1.0 {
        tau
    } else {
        -(-(sigma - 1.0) * tau).exp_m1() / (sigma - 1.0)
    };
    (-tau).exp() * (1.0 + sigma * k / (beta + sigma) * (i1 - i2))
}

/// Per-window contraction factor M(tau): between consecutive observations
/// |delta(t)|^2 <= M(t - t_n) |delta(t_n)|^2. M(0) = 1 and M'(0) = -1, so
/// M dips below 1 on a short initial window before the exponential growth
/// takes over.
pub fn contraction_m(p: &LorenzParams, tau: f64) -> Result<f64, LorenzError> {
    let k = attractor_bound_k(p)?;
    let beta = growth_rate_beta(p)?;
    Ok(contraction_m_raw(p.sigma, k, beta, tau))
}

/// Largest t such that M(s) < 1 for all s in (0, t]: the root of
/// M(t) = 1, located by doubling then bisection to 1e-9 relative width.
pub fn t_star(p: &LorenzParams) -> Result<f64, LorenzError> {
    t_star_with(p, &RootConfig::default())
}

/// As [`t_star`], honoring a caller-supplied starting bracket when the
/// config carries one.
pub fn t_star_with(p: &LorenzParams, cfg: &RootConfig) -> Result<f64, LorenzError> {
    let k = attractor_bound_k(p)?;
    let beta = growth_rate_beta(p)?;
    let m = |t: f64| contraction_m_raw(p.sigma, k, beta, t);
    let limit = 10.0;

    let (lo, hi) = match cfg.bracket_hint {
        Some((lo, hi)) if m(lo) < 1.0 && m(hi) > 1.0 => (lo, hi),
        _ => {
            // find a point strictly inside the contraction window
            let mut lo = 1e-12;
            while lo < 1e-3 && m(lo) >= 1.0 {
                lo *= 10.0;
            }
            if m(lo) >= 1.0 {
                return Err(LorenzError::NoContractionRoot { limit });
            }
            let mut hi = lo;
            let mut doublings = 0;
            while m(hi) < 1.0 {
                hi *= 2.0;
                doublings += 1;
                if hi > limit || doublings > cfg.max_doublings {
                    return Err(LorenzError::NoContractionRoot { limit });
                }
            }
            (lo, hi)
        }
    };
    bisect(|t| m(t) - 1.0, lo, hi, cfg).map_err(|_| LorenzError::NoContractionRoot { limit })
}

/// Boundedness constants of the approximating solution:
/// M1 such that |u(t)|^2 <= M1 / (1 - e^{-h}) for the given update
/// interval h, and the h-uniform bound M4 on |u(t)|.
pub fn boundedness_constants(
    p: &LorenzParams,
    eta: &LorenzState,
    h: f64,
) -> Result<(f64, f64), LorenzError> {
    let b = bounds(p, eta, h)?;
    Ok((b.m1, b.m4))
}

/// The full analytic constant set for one parameter set, initial guess
/// and update interval.
#[derive(Debug, Clone, Copy)]
pub struct LorenzBounds {
    /// |U(t)|^2 <= K on the attractor.
    pub k: f64,
    /// |delta|^2 growth rate between observations.
    pub beta: f64,
    /// Critical update interval: M(h) < 1 for h in (0, t_star).
    pub t_star: f64,
    /// Bound on the initial error: |delta(t_0)|^2 <= R = 2(K + |eta|^2).
    pub r_init: f64,
    /// |u(t)|^2 <= M1 / (1 - e^{-h}) at this h.
    pub m1: f64,
    /// Asymptotic (eta-free) constant: limsup |u(t)|^2 <= M2 / (1 - e^{-h}).
    pub m2: f64,
    /// Improved bound using the exact structure of (Au, u) - (f, u),
    /// which doubles the decay rate: |u(t)|^2 <= M3 / (1 - e^{-2h}).
    /// The per-window forcing constant |f|^2 / (4(b-1)) equals K
    /// identically, so the chain collapses to M3 = |eta|^2 + 3K.
    pub m3: f64,
    /// h-uniform bound: |u(t)| <= M4 for every h > 0.
    pub m4: f64,
}

pub fn bounds(p: &LorenzParams, eta: &LorenzState, h: f64) -> Result<LorenzBounds, LorenzError> {
    let k = attractor_bound_k(p)?;
    let beta = growth_rate_beta(p)?;
    let f_sq = forcing_norm_sq(p);
    let eta_sq = eta.norm_sq();
    let gamma = (-h).exp();
    let c1 = k * gamma + f_sq * (1.0 - gamma);
    let m1 = eta_sq + c1 + k + f_sq;
    let m2 = c1 + k + f_sq;
    let m3 = eta_sq + 3.0 * k;

    let r_init = 2.0 * (k + eta_sq);
    let ts = t_star(p)?;
    let m4 = (k.sqrt() + r_init.sqrt()).max((m1 / (-(-ts).exp_m1())).sqrt());
    Ok(LorenzBounds {
        k,
        beta,
        t_star: ts,
        r_init,
        m1,
        m2,
        m3,
        m4,
    })
}

/// Component mask observation: an orthogonal projection onto a subset of
/// the (X, Y, Z) axes. Only the X projection carries the analytic
/// guarantees; other masks are accepted for experimentation.
#[derive(Debug, Clone, Copy)]
pub struct ComponentMask {
    pub observe: [bool; 3],
}

impl ObservationOp<LorenzState> for ComponentMask {
    fn project(&self, s: &LorenzState) -> LorenzState {
        LorenzState::new(
            if self.observe[0] { s.x } else { 0.0 },
            if self.observe[1] { s.y } else { 0.0 },
            if self.observe[2] { s.z } else { 0.0 },
        )
    }

    fn complement(&self, s: &LorenzState) -> LorenzState {
        LorenzState::new(
            if self.observe[0] { 0.0 } else { s.x },
            if self.observe[1] { 0.0 } else { s.y },
            if self.observe[2] { 0.0 } else { s.z },
        )
    }
}

/// Projection onto the X component, P = diag(1, 0, 0).
pub fn proj_x() -> ComponentMask {
    ComponentMask {
        observe: [true, false, false],
    }
}

/// The Lorenz vector field as an integrable system.
#[derive(Debug, Clone)]
pub struct LorenzSystem {
    pub params: LorenzParams,
}

impl LorenzSystem {
    pub fn new(params: LorenzParams) -> Result<Self, LorenzError> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn standard() -> Self {
        Self {
            params: LorenzParams::standard(),
        }
    }
}

impl OdeSystem for LorenzSystem {
    type State = LorenzState;

    fn full_rhs(&mut self, s: &LorenzState) -> LorenzState {
        rhs(&self.params, s)
    }
}

impl DaSystem for LorenzSystem {
    fn error_norms(&self, reference: &LorenzState, approx: &LorenzState) -> (f64, Option<f64>) {
        (reference.sub(approx).norm(), None)
    }

    fn monitor_norm(&self, s: &LorenzState) -> f64 {
        s.norm()
    }
}

/// Integrate from `from` for `t_spinup` time units so the state lands
/// (numerically) on the attractor.
pub fn spin_up(
    p: &LorenzParams,
    from: LorenzState,
    t_spinup: f64,
    cfg: &StepperConfig,
) -> Result<LorenzState, LorenzError> {
    let mut sys = LorenzSystem { params: *p };
    Ok(integrate(&mut sys, &from, 0.0, t_spinup, cfg)?)
}

/// `count` decorrelated states on the attractor: spin up from (1, 1, 1)
/// for `t_spinup`, then sample every `spacing` time units.
pub fn attractor_samples(
    p: &LorenzParams,
    cfg: &StepperConfig,
    t_spinup: f64,
    spacing: f64,
    count: usize,
) -> Result<Vec<LorenzState>, LorenzError> {
    let mut sys = LorenzSystem { params: *p };
    let mut s = integrate(
        &mut sys,
        &LorenzState::new(1.0, 1.0, 1.0),
        0.0,
        t_spinup,
        cfg,
    )?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(s);
        s = integrate(&mut sys, &s, 0.0, spacing, cfg)?;
    }
    Ok(out)
}
