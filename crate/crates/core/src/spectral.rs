//! FFT plumbing shared by the grid operators.
//!
//! Coefficients follow the unnormalized DFT convention `F_j = Σ_n f_n e^{-2πi jn/N}`;
//! the inverse divides by `N`. Index `j` carries the wavenumber `k_j = π j / L`
//! (with `j - N` for the upper half). The unpaired Nyquist index `N/2` is
//! handled by each operator: odd symbols vanish there.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf
}

/// Inverse transform; returns the real part scaled by `1/N`.
pub(crate) fn inverse_real(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(&mut coeffs);
    let scale = 1.0 / n as f64;
    coeffs.iter().map(|c| c.re * scale).collect()
}

/// Wavenumber of FFT index `j`. The Nyquist index maps to `-π/h`.
pub(crate) fn wavenumber(grid: &Grid, j: usize) -> f64 {
    let n = grid.n_points();
    let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
    std::f64::consts::PI * signed / grid.half_width()
}

pub(crate) fn is_nyquist(grid: &Grid, j: usize) -> bool {
    grid.n_points() % 2 == 0 && j == grid.n_points() / 2
}

/// Applies a Fourier symbol `m(k)` to real samples. `nyquist` is the value
/// used at the unpaired Nyquist index, where a complex symbol cannot keep the
/// result real.
pub(crate) fn apply_symbol<F>(grid: &Grid, values: &[f64], symbol: F, nyquist: Complex64) -> Vec<f64>
where
    F: Fn(f64) -> Complex64,
{
    let mut coeffs = forward(values);
    for (j, c) in coeffs.iter_mut().enumerate() {
        let m = if is_nyquist(grid, j) {
            nyquist
        } else {
            symbol(wavenumber(grid, j))
        };
        *c *= m;
    }
    inverse_real(coeffs)
}
