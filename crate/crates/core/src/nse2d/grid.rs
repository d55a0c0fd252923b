//! Fourier grid on the L-periodic square: wavevectors k = (2pi/L) m with
//! integer mode pairs m, the two-thirds dealiasing mask, and the smallest
//! eigenvalue lambda_1 = (2pi/L)^2 of the Stokes operator.

use super::NseError;
use std::sync::Arc;

#[derive(Debug)]
struct GridData {
    /// Signed integer mode per 1D index.
    modes: Vec<i64>,
    /// Flattened per-index wavevector components and |k|^2.
    kx: Vec<f64>,
    ky: Vec<f64>,
    ksq: Vec<f64>,
    /// Two-thirds rule: |m_i| <= n/3 in both directions.
    dealias: Vec<bool>,
}

/// Cheap to clone: the tables are shared.
#[derive(Debug, Clone)]
pub struct FourierGrid {
    n: usize,
    l: f64,
    lambda1: f64,
    data: Arc<GridData>,
}

impl FourierGrid {
    pub fn new(n: usize, l: f64) -> Result<Self, NseError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(NseError::GridSize { n });
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(NseError::BoxSize { l });
        }
        let two_pi_over_l = 2.0 * std::f64::consts::PI / l;
        let half = n / 2;
        let cutoff = (n / 3) as i64;
        let modes: Vec<i64> = (0..n)
            .map(|i| {
                if i <= half {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect();
        let k1d: Vec<f64> = modes.iter().map(|&m| m as f64 * two_pi_over_l).collect();
        let nn = n * n;
        let mut kx = vec![0.0; nn];
        let mut ky = vec![0.0; nn];
        let mut ksq = vec![0.0; nn];
        let mut dealias = vec![false; nn];
        for ix in 0..n {
            for iy in 0..n {
                let idx = ix * n + iy;
                kx[idx] = k1d[ix];
                ky[idx] = k1d[iy];
                ksq[idx] = k1d[ix] * k1d[ix] + k1d[iy] * k1d[iy];
                dealias[idx] = modes[ix].abs() <= cutoff && modes[iy].abs() <= cutoff;
            }
        }
        Ok(Self {
            n,
            l,
            lambda1: two_pi_over_l * two_pi_over_l,
            data: Arc::new(GridData {
                modes,
                kx,
                ky,
                ksq,
                dealias,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Smallest eigenvalue of A: (2pi/L)^2.
    pub fn lambda_1(&self) -> f64 {
        self.lambda1
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.n + iy
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        (self.data.kx[idx], self.data.ky[idx])
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (self.data.modes[idx / self.n], self.data.modes[idx % self.n])
    }

    #[inline]
    pub fn k_sq(&self, idx: usize) -> f64 {
        self.data.ksq[idx]
    }

    #[inline]
    pub(crate) fn ksq_flat(&self) -> &[f64] {
        &self.data.ksq
    }

    #[inline]
    pub(crate) fn kx_flat(&self) -> &[f64] {
        &self.data.kx
    }

    #[inline]
    pub(crate) fn ky_flat(&self) -> &[f64] {
        &self.data.ky
    }

    #[inline]
    pub fn dealiased(&self, idx: usize) -> bool {
        self.data.dealias[idx]
    }

    /// Index of the conjugate mode -k.
    #[inline]
    pub fn conj_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (ix, iy) = (idx / n, idx % n);
        ((n - ix) % n) * n + (n - iy) % n
    }

    /// Largest |k|^2 inside the dealias mask: states live entirely below
    /// this, so P_lambda with lambda at or above it is the identity.
    pub fn max_dealiased_k_sq(&self) -> f64 {
        let c = (self.n / 3) as f64 * 2.0 * std::f64::consts::PI / self.l;
        2.0 * c * c
    }
}
