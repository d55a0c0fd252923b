//! Discrete-in-time data assimilation laboratory.
//!
//! A reference trajectory of a dissipative system is observed through a
//! finite-rank orthogonal projection `P` at a sequence of times; between
//! observations an approximating solution runs freely, and at each
//! observation time its observed component is impulsively replaced by the
//! reference's. This crate provides:
//!
//! * [`integrators`] — fixed-step RK4 and integrating-factor RK4.
//! * [`lorenz`] — the Lorenz system in bilinear form, its X-component
//!   observation and the attractor/growth/contraction constants that
//!   control when assimilation converges.
//! * [`nse2d`] — a pseudospectral solver for the 2D incompressible
//!   Navier-Stokes equations on the periodic box, the low-mode observation
//!   projection and the corresponding bound engine.
//! * [`dda`] — the generic assimilation driver: update rule, error
//!   tracking, convergence verdicts, threshold search and boundedness
//!   monitoring.
//! * [`analysis`] — bisection, adaptive Simpson quadrature and finite
//!   differences used to evaluate and cross-check the bounds.

pub mod analysis;
pub mod dda;
pub mod integrators;
pub mod lorenz;
pub mod nse2d;
