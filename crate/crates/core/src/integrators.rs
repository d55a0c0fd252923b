//! Deterministic fixed-step time integration.
//!
//! Two schemes: classical 4th-order Runge-Kutta, and integrating-factor
//! RK4 where a stiff linear part is propagated exactly between stages
//! (the 2D Navier-Stokes solver uses this with the per-mode viscous
//! factor e^{-nu k^2 dt}). Intervals that are not an integer multiple of
//! `dt` are finished with one shortened step so the end time is hit
//! exactly; observation times must land where they are requested.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegrateError {
    /// A non-finite state component appeared mid-integration. Carries the
    /// model time of the failing step so callers can report blow-up times.
    #[error("state blew up (non-finite component) at t = {t}")]
    BlowUp { t: f64 },
    #[error("invalid interval: t1 = {t1} is before t0 = {t0}")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("invalid step size dt = {dt}: must be positive and finite")]
    InvalidStep { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical 4th-order Runge-Kutta on the full right-hand side.
    Rk4,
    /// Integrating-factor RK4: the stiff linear part is applied exactly,
    /// the remainder is advanced with RK4 stages.
    IfRk4,
}

#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt: f64,
}

impl StepperConfig {
    pub fn rk4(dt: f64) -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt,
        }
    }

    pub fn ifrk4(dt: f64) -> Self {
        Self {
            scheme: Scheme::IfRk4,
            dt,
        }
    }
}

/// Minimal vector-space interface the steppers need from a state.
pub trait StateOps: Clone {
    /// `self += a * other`.
    fn scaled_add(&mut self, a: f64, other: &Self);
    /// `self *= a`.
    fn scale(&mut self, a: f64);
    fn all_finite(&self) -> bool;
}

impl StateOps for Vec<f64> {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (x, y) in self.iter_mut().zip(other) {
            *x += a * y;
        }
    }

    fn scale(&mut self, a: f64) {
        for x in self.iter_mut() {
            *x *= a;
        }
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

/// An autonomous system du/dt = F(u), optionally split as F = L u + N(u)
/// with an exactly integrable linear part L.
pub trait OdeSystem {
    type State: StateOps;

    /// Complete right-hand side F(u).
    fn full_rhs(&mut self, s: &Self::State) -> Self::State;

    /// F(u) minus the part `stiff_exp` integrates exactly. Defaults to the
    /// full right-hand side (no stiff split).
    fn nonstiff_rhs(&mut self, s: &Self::State) -> Self::State {
        self.full_rhs(s)
    }

    /// In-place application of the exact propagator e^{L dt} of the stiff
    /// linear part. Identity by default. Takes `&mut self` so systems can
    /// cache per-dt propagator tables.
    fn stiff_exp(&mut self, s: &mut Self::State, dt: f64) {
        let _ = (s, dt);
    }
}

/// Split a span into full steps of `dt` plus one shortened final step.
/// Remainders below dt * 1e-9 are dropped so spans that are an integer
/// multiple of dt up to rounding take exactly that many steps.
pub fn partition(span: f64, dt: f64) -> (u64, f64) {
    let n_full = (span / dt).floor() as u64;
    let mut rem = span - n_full as f64 * dt;
    if rem <= dt * 1e-9 {
        rem = 0.0;
    }
    (n_full, rem)
}

/// One step of the selected scheme.
pub fn step<S: OdeSystem>(sys: &mut S, u: &S::State, dt: f64, scheme: Scheme) -> S::State {
    match scheme {
        Scheme::Rk4 => rk4_step(sys, u, dt),
        Scheme::IfRk4 => ifrk4_step(sys, u, dt),
    }
}

fn rk4_step<S: OdeSystem>(sys: &mut S, u: &S::State, dt: f64) -> S::State {
    let k1 = sys.full_rhs(u);
    let mut s2 = u.clone();
    s2.scaled_add(0.5 * dt, &k1);
    let k2 = sys.full_rhs(&s2);
    let mut s3 = u.clone();
    s3.scaled_add(0.5 * dt, &k2);
    let k3 = sys.full_rhs(&s3);
    let mut s4 = u.clone();
    s4.scaled_add(dt, &k3);
    let k4 = sys.full_rhs(&s4);

    let mut out = u.clone();
    out.scaled_add(dt / 6.0, &k1);
    out.scaled_add(dt / 3.0, &k2);
    out.scaled_add(dt / 3.0, &k3);
    out.scaled_add(dt / 6.0, &k4);
    out
}

fn ifrk4_step<S: OdeSystem>(sys: &mut S, u: &S::State, dt: f64) -> S::State {
    let half = 0.5 * dt;

    let n1 = sys.nonstiff_rhs(u);

    let mut s2 = u.clone();
    s2.scaled_add(half, &n1);
    sys.stiff_exp(&mut s2, half); // E (u + dt/2 N1)
    let n2 = sys.nonstiff_rhs(&s2);

    let mut eu = u.clone();
    sys.stiff_exp(&mut eu, half); // E u
    let mut s3 = eu.clone();
    s3.scaled_add(half, &n2);
    let n3 = sys.nonstiff_rhs(&s3);

    let mut en3 = n3;
    sys.stiff_exp(&mut en3, half); // E N3
    let mut s4 = eu;
    sys.stiff_exp(&mut s4, half); // E^2 u
    s4.scaled_add(dt, &en3);
    let n4 = sys.nonstiff_rhs(&s4);

    // u' = E^2 u + dt/6 (E^2 N1 + 2 E N2 + 2 E N3 + N4)
    let mut out = u.clone();
    sys.stiff_exp(&mut out, dt);
    let mut t1 = n1;
    sys.stiff_exp(&mut t1, dt);
    out.scaled_add(dt / 6.0, &t1);
    let mut t2 = n2;
    sys.stiff_exp(&mut t2, half);
    out.scaled_add(dt / 3.0, &t2);
    out.scaled_add(dt / 3.0, &en3);
    out.scaled_add(dt / 6.0, &n4);
    out
}

/// Advance `state` from `t0` to `t1`, invoking `observe(t, state)` after
/// every accepted step. The final step is shortened so that `t1` is hit
/// exactly. Bit-for-bit deterministic for fixed inputs.
pub fn integrate_observed<S, F>(
    sys: &mut S,
    state: &S::State,
    t0: f64,
    t1: f64,
    cfg: &StepperConfig,
    mut observe: F,
) -> Result<S::State, IntegrateError>
where
    S: OdeSystem,
    F: FnMut(f64, &S::State),
{
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(IntegrateError::InvalidStep { dt: cfg.dt });
    }
    if t1 < t0 {
        return Err(IntegrateError::InvalidInterval { t0, t1 });
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(state.clone());
    }

    let (n_full, rem) = partition(span, cfg.dt);

    let mut s = state.clone();
    for i in 0..n_full {
        s = step(sys, &s, cfg.dt, cfg.scheme);
        let t = t0 + (i + 1) as f64 * cfg.dt;
        if !s.all_finite() {
            return Err(IntegrateError::BlowUp { t });
        }
        observe(t, &s);
    }
    if rem > 0.0 {
        s = step(sys, &s, rem, cfg.scheme);
        if !s.all_finite() {
            return Err(IntegrateError::BlowUp { t: t1 });
        }
        observe(t1, &s);
    }
    Ok(s)
}

/// Advance `state` from `t0` to `t1` and return the endpoint state.
pub fn integrate<S: OdeSystem>(
    sys: &mut S,
    state: &S::State,
    t0: f64,
    t1: f64,
    cfg: &StepperConfig,
) -> Result<S::State, IntegrateError> {
    integrate_observed(sys, state, t0, t1, cfg, |_, _| {})
}
