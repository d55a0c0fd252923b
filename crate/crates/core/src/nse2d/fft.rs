//! Per-solver 2D FFT workspace built on rustfft's 1D transforms.
//!
//! Coefficient convention: `forward` maps physical samples to the
//! coefficients of u(x) = sum_k u_k e^{ik.x} (it divides by N^2);
//! `inverse` evaluates that sum on the grid. forward(inverse(c)) == c up
//! to rounding.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch_fwd: Vec<Complex64>,
    scratch_inv: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_fwd = vec![Complex64::default(); fwd.get_inplace_scratch_len()];
        let scratch_inv = vec![Complex64::default(); inv.get_inplace_scratch_len()];
        Self {
            n,
            fwd,
            inv,
            scratch_fwd,
            scratch_inv,
        }
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    /// Physical samples -> Fourier coefficients (normalized by 1/N^2).
    pub fn forward(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.fwd.process_with_scratch(data, &mut self.scratch_fwd);
        self.transpose(data);
        self.fwd.process_with_scratch(data, &mut self.scratch_fwd);
        self.transpose(data);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Fourier coefficients -> physical samples (plain evaluation, no
    /// normalization).
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.inv.process_with_scratch(data, &mut self.scratch_inv);
        self.transpose(data);
        self.inv.process_with_scratch(data, &mut self.scratch_inv);
        self.transpose(data);
    }
}
