//! Divergence-free spectral velocity fields and the operations that stay
//! in coefficient space: norms, the Leray-Helmholtz projection, the
//! low-mode observation projection P_lambda and random field generation.
//!
//! A field is stored as the full N x N table of complex coefficients per
//! velocity component. Invariants maintained everywhere: Hermitian
//! symmetry u_{-k} = conj(u_k) (real fields), k . u_k = 0
//! (incompressibility), zero mean, and support inside the dealias mask.

use super::grid::FourierGrid;
use crate::dda::ObservationOp;
use crate::integrators::StateOps;
use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVelocity {
    pub(crate) n: usize,
    pub(crate) ux: Vec<Complex64>,
    pub(crate) uy: Vec<Complex64>,
}

impl SpectralVelocity {
    pub fn zero(grid: &FourierGrid) -> Self {
        let nn = grid.n() * grid.n();
        Self {
            n: grid.n(),
            ux: vec![Complex64::default(); nn],
            uy: vec![Complex64::default(); nn],
        }
    }

    pub fn from_components(grid: &FourierGrid, ux: Vec<Complex64>, uy: Vec<Complex64>) -> Self {
        assert_eq!(ux.len(), grid.n() * grid.n());
        assert_eq!(uy.len(), grid.n() * grid.n());
        Self {
            n: grid.n(),
            ux,
            uy,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, idx: usize) -> (Complex64, Complex64) {
        (self.ux[idx], self.uy[idx])
    }

    pub fn ux(&self) -> &[Complex64] {
        &self.ux
    }

    pub fn uy(&self) -> &[Complex64] {
        &self.uy
    }

    /// Raw coefficient access; the caller is responsible for restoring the
    /// structural invariants (Hermitian symmetry, incompressibility,
    /// dealiased support) afterwards.
    pub fn ux_mut(&mut self) -> &mut [Complex64] {
        &mut self.ux
    }

    pub fn uy_mut(&mut self) -> &mut [Complex64] {
        &mut self.uy
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.scaled_add(-1.0, other);
        out
    }

    /// Pointwise multiply both components by a real per-mode factor.
    pub(crate) fn mul_per_mode<F: Fn(usize) -> f64>(&mut self, f: F) {
        for idx in 0..self.ux.len() {
            let a = f(idx);
            self.ux[idx] *= a;
            self.uy[idx] *= a;
        }
    }

    /// Largest |u_k - conj(u_{-k})| over the grid: zero for real fields.
    pub fn hermitian_defect(&self, grid: &FourierGrid) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.ux.len() {
            let c = grid.conj_index(idx);
            worst = worst.max((self.ux[idx] - self.ux[c].conj()).norm());
            worst = worst.max((self.uy[idx] - self.uy[c].conj()).norm());
        }
        worst
    }

    /// Replace the field with its Hermitian part, making it exactly the
    /// spectrum of a real field.
    pub fn symmetrize(&mut self, grid: &FourierGrid) {
        let ux = self.ux.clone();
        let uy = self.uy.clone();
        for idx in 0..ux.len() {
            let c = grid.conj_index(idx);
            self.ux[idx] = 0.5 * (ux[idx] + ux[c].conj());
            self.uy[idx] = 0.5 * (uy[idx] + uy[c].conj());
        }
    }

    /// max_k |k . u_k|, the spectral divergence residual.
    pub fn divergence_max(&self, grid: &FourierGrid) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.ux.len() {
            let (kx, ky) = grid.wavevector(idx);
            worst = worst.max((kx * self.ux[idx] + ky * self.uy[idx]).norm());
        }
        worst
    }
}

impl StateOps for SpectralVelocity {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (x, y) in self.ux.iter_mut().zip(&other.ux) {
            *x += a * y;
        }
        for (x, y) in self.uy.iter_mut().zip(&other.uy) {
            *x += a * y;
        }
    }

    fn scale(&mut self, a: f64) {
        for x in self.ux.iter_mut() {
            *x *= a;
        }
        for x in self.uy.iter_mut() {
            *x *= a;
        }
    }

    fn all_finite(&self) -> bool {
        self.ux
            .iter()
            .chain(&self.uy)
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Spectral norms: |u| (energy), ||u|| (enstrophy-level) and |Au|, defined
/// as the square roots of L^2 sum k^{2p} |u_k|^2 for p = 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
}

pub fn norms(grid: &FourierGrid, u: &SpectralVelocity) -> Norms {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for idx in 0..u.ux.len() {
        let k2 = grid.k_sq(idx);
        let e = u.ux[idx].norm_sqr() + u.uy[idx].norm_sqr();
        s0 += e;
        s1 += k2 * e;
        s2 += k2 * k2 * e;
    }
    let l2sq = grid.l() * grid.l();
    Norms {
        l2: (l2sq * s0).sqrt(),
        h1: (l2sq * s1).sqrt(),
        h2: (l2sq * s2).sqrt(),
    }
}

/// L^2 inner product (a, b) = L^2 sum Re(a_k . conj(b_k)).
pub fn inner_l2(grid: &FourierGrid, a: &SpectralVelocity, b: &SpectralVelocity) -> f64 {
    let mut s = 0.0;
    for idx in 0..a.ux.len() {
        s += (a.ux[idx] * b.ux[idx].conj() + a.uy[idx] * b.uy[idx].conj()).re;
    }
    grid.l() * grid.l() * s
}

/// A u: per-mode multiplication by |k|^2.
pub fn apply_a(grid: &FourierGrid, u: &SpectralVelocity) -> SpectralVelocity {
    let mut out = u.clone();
    out.mul_per_mode(|idx| grid.k_sq(idx));
    out
}

pub(crate) fn leray_project_in_place(grid: &FourierGrid, u: &mut SpectralVelocity) {
    for idx in 0..u.ux.len() {
        let (kx, ky) = grid.wavevector(idx);
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            u.ux[idx] = Complex64::default();
            u.uy[idx] = Complex64::default();
            continue;
        }
        let d = (kx * u.ux[idx] + ky * u.uy[idx]) / k2;
        u.ux[idx] -= kx * d;
        u.uy[idx] -= ky * d;
    }
}

/// Leray-Helmholtz projection: per mode u_k <- u_k - k (k . u_k)/|k|^2,
/// annihilating gradients; the mean mode is zeroed.
pub fn leray_project(grid: &FourierGrid, u: &SpectralVelocity) -> SpectralVelocity {
    let mut out = u.clone();
    leray_project_in_place(grid, &mut out);
    out
}

pub(crate) fn dealias_in_place(grid: &FourierGrid, u: &mut SpectralVelocity) {
    for idx in 0..u.ux.len() {
        if !grid.dealiased(idx) {
            u.ux[idx] = Complex64::default();
            u.uy[idx] = Complex64::default();
        }
    }
}

/// Observation projection P_lambda: retains Fourier modes with
/// |k|^2 <= lambda. lambda^{-1/2} is the smallest observed length scale.
#[derive(Debug, Clone)]
pub struct SpectralProjection {
    pub lambda: f64,
    keep: Vec<bool>,
}

impl SpectralProjection {
    pub fn retained_modes(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }
}

pub fn proj_lambda(grid: &FourierGrid, lambda: f64) -> SpectralProjection {
    let nn = grid.n() * grid.n();
    let keep = (0..nn).map(|idx| grid.k_sq(idx) <= lambda).collect();
    SpectralProjection { lambda, keep }
}

impl ObservationOp<SpectralVelocity> for SpectralProjection {
    fn project(&self, s: &SpectralVelocity) -> SpectralVelocity {
        let mut out = s.clone();
        for idx in 0..out.ux.len() {
            if !self.keep[idx] {
                out.ux[idx] = Complex64::default();
                out.uy[idx] = Complex64::default();
            }
        }
        out
    }

    fn complement(&self, s: &SpectralVelocity) -> SpectralVelocity {
        let mut out = s.clone();
        for idx in 0..out.ux.len() {
            if self.keep[idx] {
                out.ux[idx] = Complex64::default();
                out.uy[idx] = Complex64::default();
            }
        }
        out
    }
}

/// Random divergence-free field supported on 0 < |k|^2 <= k_sq_max (and
/// inside the dealias mask), scaled to |u| = target_l2. Used for initial
/// conditions and property tests.
pub fn random_div_free<R: Rng>(
    grid: &FourierGrid,
    rng: &mut R,
    k_sq_max: f64,
    target_l2: f64,
) -> SpectralVelocity {
    let mut u = SpectralVelocity::zero(grid);
    for idx in 0..u.ux.len() {
        let k2 = grid.k_sq(idx);
        if k2 == 0.0 || k2 > k_sq_max || !grid.dealiased(idx) {
            continue;
        }
        // mild spectral decay keeps high-k content bounded
        let amp = 1.0 / (1.0 + k2);
        u.ux[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        u.uy[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
    }
    u.symmetrize(grid);
    leray_project_in_place(grid, &mut u);
    dealias_in_place(grid, &mut u);
    let l2 = norms(grid, &u).l2;
    if l2 > 0.0 {
        u.scale(target_l2 / l2);
    }
    u
}

/// Random divergence-free field over the whole dealiased range.
pub fn random_dealiased<R: Rng>(
    grid: &FourierGrid,
    rng: &mut R,
    target_l2: f64,
) -> SpectralVelocity {
    random_div_free(grid, rng, f64::INFINITY, target_l2)
}
