//! Bessel functions `J₀`, `J₁` and the propagator kernels
//! `K_t(y) = √(t/y) J₀'(2√(ty))` and `J_t(y) = J₀(2√(ty))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

pub fn bessel_j0(z: f64) -> f64 {
    libm::j0(z)
}

pub fn bessel_j1(z: f64) -> f64 {
    libm::j1(z)
}

/// `J₀'(z) = -J₁(z)`.
pub fn bessel_j0_prime(z: f64) -> f64 {
    -libm::j1(z)
}

/// `2 J₁(z) / z`, continuous through `z = 0`.
fn j1_ratio(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let w = 0.25 * z * z;
        // Σ (-w)^m / (m! (m+1)!)
        1.0 - w / 2.0 + w * w / 12.0 - w * w * w / 144.0
    } else {
        2.0 * libm::j1(z) / z
    }
}

/// `K_t(s)` for `s ≥ 0`, using the limit `K_t(0) = -t` on the diagonal.
pub(crate) fn kernel_k_at(t: f64, s: f64) -> f64 {
    -t * j1_ratio(2.0 * (t * s).sqrt())
}

pub(crate) fn kernel_j_at(t: f64, s: f64) -> f64 {
    libm::j0(2.0 * (t * s).sqrt())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("kernel time must be finite and >= 0, got {t}")))
    }
}

/// `K_t(y)` for `y > 0`. The diagonal value is [`kernel_k_limit`].
pub fn kernel_k(t: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!(
            "K_t(y) needs y > 0, got {y}; use kernel_k_limit for y -> 0+"
        )));
    }
    Ok(kernel_k_at(t, y))
}

/// `lim_{y→0⁺} K_t(y) = -t`.
pub fn kernel_k_limit(t: f64) -> f64 {
    -t
}

pub fn kernel_j(t: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("J_t(y) needs y >= 0, got {y}")));
    }
    Ok(kernel_j_at(t, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub y: f64,
    pub k_value: f64,
    pub j_value: f64,
}

pub fn kernel_sample(t: f64, y: f64) -> Result<KernelSample> {
    let k_value = if y == 0.0 {
        check_time(t)?;
        kernel_k_limit(t)
    } else {
        kernel_k(t, y)?
    };
    Ok(KernelSample {
        t,
        y,
        k_value,
        j_value: kernel_j(t, y)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    pub t: f64,
    pub sup_k: f64,
    /// `‖K_t‖_{L²(0, Y)}`.
    pub l2_k: f64,
    pub sup_j: f64,
    /// `sup |K_t| / t`.
    pub c_inf_fit: f64,
    /// `‖K_t‖_{L²(0, Y)} / √t`.
    pub c_l2_fit: f64,
    pub window: f64,
    /// Relative L² mass missing beyond the window, `≈ 1/(π Z)` with `Z = 2√(tY)`.
    pub tail_estimate: f64,
}

/// Window for the L² quadrature; keeps `2√(tY) ≥ 40` for every `t`.
pub fn l2_window(t: f64) -> f64 {
    200f64.max(400.0 * t).max(400.0 / t)
}

pub fn kernel_bounds(t: f64) -> Result<KernelBounds> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("kernel bounds need t > 0, got {t}")));
    }
    let window = l2_window(t);

    // sup over a log grid reaching down to y = 1e-12 plus a fine uniform grid.
    let mut sup_k = 0f64;
    let mut sup_j = 0f64;
    let n_log = 2000;
    let (lo, hi) = (1e-12f64.ln(), window.ln());
    for i in 0..=n_log {
        let y = (lo + (hi - lo) * i as f64 / n_log as f64).exp();
        sup_k = sup_k.max(kernel_k_at(t, y).abs());
        sup_j = sup_j.max(kernel_j_at(t, y).abs());
    }
    let n_lin = 20_000;
    for i in 0..=n_lin {
        let y = window * i as f64 / n_lin as f64;
        sup_k = sup_k.max(kernel_k_at(t, y).abs());
        sup_j = sup_j.max(kernel_j_at(t, y).abs());
    }

    // ∫₀^Y K² dy with y = s², panels sized to the oscillation in s.
    let rule = quadrature::gauss_legendre(16);
    let s_max = window.sqrt();
    let panels = ((s_max * t.sqrt() * 2.0).ceil() as usize).max(64);
    let ds = s_max / panels as f64;
    let l2_sq: f64 = (0..panels)
        .map(|i| {
            quadrature::integrate(
                |s| {
                    let k = kernel_k_at(t, s * s);
                    2.0 * s * k * k
                },
                i as f64 * ds,
                (i + 1) as f64 * ds,
                &rule,
            )
        })
        .sum();
    let l2_k = l2_sq.sqrt();
    Ok(KernelBounds {
        t,
        sup_k,
        l2_k,
        sup_j,
        c_inf_fit: sup_k / t,
        c_l2_fit: l2_k / t.sqrt(),
        window,
        tail_estimate: 1.0 / (std::f64::consts::PI * 2.0 * (t * window).sqrt()),
    })
}

pub fn kernel_bounds_report(t_list: &[f64]) -> Result<Vec<KernelBounds>> {
    t_list.iter().map(|&t| kernel_bounds(t)).collect()
}
