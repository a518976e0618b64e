//! The linear semigroup `e^{tL}`, `L = ∂_y^{-1}`, with symbol `e^{-it/k}`.
//!
//! Three evaluators:
//! * [`propagate_spectral`]: FFT multiplier on the periodic box (production).
//! * [`propagate_kernel`] / [`propagate_p`]: Bessel-kernel convolution on the
//!   real line, `Q = Q₀ + ∫_y^∞ K_t(y'-y) Q₀(y') dy'` and
//!   `P = -∫_y^∞ J_t(y'-y) Q₀(y') dy'`, with data taken as zero outside the grid.
//! * [`propagate_line`]: direct Fourier inversion on the real line, the
//!   reference for the kernel forms. The box solution differs from the
//!   real-line one by the slowly decaying dispersive tail that wraps around.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{Error, Result};
use crate::grid::{self, Grid, GridFunction, Tolerances};
use crate::quadrature;
use crate::spectral;

pub const DEFAULT_GREGORY_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorMode {
    Spectral,
    Kernel { order: usize },
}

/// `e^{tL}` prepared for one grid and one time.
#[derive(Debug, Clone)]
pub struct PropagatorPlan {
    grid: Grid,
    t: f64,
    mode: PropagatorMode,
    /// Spectral multipliers by FFT index, or `h K_t(mh)` for the kernel mode.
    table: Table,
}

#[derive(Debug, Clone)]
enum Table {
    Multiplier(Vec<Complex64>),
    Kernel(Vec<f64>),
}

fn multiplier(grid: &Grid, t: f64) -> Vec<Complex64> {
    (0..grid.n_points())
        .map(|j| {
            let k = spectral::wavenumber(grid, j);
            if k == 0.0 {
                Complex64::new(0.0, 0.0)
            } else if spectral::is_nyquist(grid, j) {
                Complex64::new((t / k).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -t / k)
            }
        })
        .collect()
}

impl PropagatorPlan {
    pub fn spectral(grid: Grid, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("propagation time must be finite, got {t}")));
        }
        Ok(Self {
            grid,
            t,
            mode: PropagatorMode::Spectral,
            table: Table::Multiplier(multiplier(&grid, t)),
        })
    }

    pub fn kernel(grid: Grid, t: f64, order: usize) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("kernel propagation needs t >= 0, got {t}")));
        }
        let h = grid.spacing();
        let table = (0..grid.n_points())
            .map(|m| bessel::kernel_k_at(t, m as f64 * h))
            .collect();
        Ok(Self {
            grid,
            t,
            mode: PropagatorMode::Kernel { order },
            table: Table::Kernel(table),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mode(&self) -> PropagatorMode {
        self.mode
    }

    pub fn apply(&self, q0: &GridFunction) -> Result<GridFunction> {
        if q0.grid() != &self.grid {
            return Err(Error::InvalidInput("propagator and data grids differ".into()));
        }
        if let PropagatorMode::Spectral = self.mode {
            grid::check_zero_mass(q0, &Tolerances::default())?;
        }
        Ok(GridFunction::from_raw(self.grid, self.apply_values(q0.values())))
    }

    /// No mass or grid checks; the spectral mode drops the mean anyway.
    pub(crate) fn apply_values(&self, values: &[f64]) -> Vec<f64> {
        match (&self.table, self.mode) {
            (Table::Multiplier(m), _) => {
                let mut c = spectral::forward(values);
                for (c, m) in c.iter_mut().zip(m) {
                    *c *= m;
                }
                spectral::inverse_real(c)
            }
            (Table::Kernel(k), PropagatorMode::Kernel { order }) => {
                let h = self.grid.spacing();
                let mut out = values.to_vec();
                convolve_forward(values, k, order, h, &mut out);
                out
            }
            _ => unreachable!("table and mode are built together"),
        }
    }
}

/// `out_j += h Σ_m w_m ker_m v_{j+m}` with Gregory weights over `[y_j, y_{N-1}]`.
fn convolve_forward(values: &[f64], ker: &[f64], order: usize, h: f64, out: &mut [f64]) {
    let n = values.len();
    for j in 0..n {
        let len = n - j;
        let w = quadrature::gregory_weights(len, order);
        let s: f64 = (0..len).map(|m| w[m] * ker[m] * values[j + m]).sum();
        out[j] += h * s;
    }
}

/// `e^{tL} q₀` by the FFT multiplier `e^{-it/k}`; `k = 0` is zeroed and the
/// Nyquist mode gets `cos(t/k_N)`. Any real `t` is allowed.
pub fn propagate_spectral(q0: &GridFunction, t: f64) -> Result<GridFunction> {
    PropagatorPlan::spectral(*q0.grid(), t)?.apply(q0)
}

/// `e^{tL} q₀` by the Bessel-kernel convolution, `t ≥ 0`.
pub fn propagate_kernel(q0: &GridFunction, t: f64) -> Result<GridFunction> {
    PropagatorPlan::kernel(*q0.grid(), t, DEFAULT_GREGORY_ORDER)?.apply(q0)
}

/// `P(·, t) = -∫_y^∞ J_t(y'-y) q₀(y') dy'`, the antiderivative of `e^{tL} q₀`.
pub fn propagate_p(q0: &GridFunction, t: f64) -> Result<GridFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("kernel propagation needs t >= 0, got {t}")));
    }
    let grid = *q0.grid();
    let h = grid.spacing();
    let ker: Vec<f64> = (0..grid.n_points())
        .map(|m| -bessel::kernel_j_at(t, m as f64 * h))
        .collect();
    let mut out = vec![0.0; grid.n_points()];
    convolve_forward(q0.values(), &ker, DEFAULT_GREGORY_ORDER, h, &mut out);
    Ok(GridFunction::from_raw(grid, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineField {
    Q,
    P,
}

/// `h Σ_j v_j e^{-ik y_j}`.
fn sampled_transform(grid: &Grid, values: &[f64], k: f64) -> Complex64 {
    let h = grid.spacing();
    let step = Complex64::from_polar(1.0, -k * h);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut phase = Complex64::new(0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        if j % 64 == 0 {
            phase = Complex64::from_polar(1.0, -k * grid.point(j));
        }
        acc += phase * v;
        phase *= step;
    }
    acc * h
}

/// Adds `Re(c e^{ik y_j})` to every `out_j`.
fn add_mode(grid: &Grid, c: Complex64, k: f64, out: &mut [f64]) {
    let step = Complex64::from_polar(1.0, k * grid.spacing());
    let mut phase = Complex64::new(0.0, 0.0);
    for (j, o) in out.iter_mut().enumerate() {
        if j % 64 == 0 {
            phase = c * Complex64::from_polar(1.0, k * grid.point(j));
        }
        *o += phase.re;
        phase *= step;
    }
}

/// Real-line solution at the grid points by direct Fourier inversion,
/// `(1/π) Re ∫₀^{π/h} q̂₀(k) m(k) e^{iky} dk` with `m = e^{-it/k}` for `Q`
/// and `e^{-it/k}/(ik)` for `P`. `q̂₀` is the sampled transform of the grid
/// data (zero outside the grid). The low-`k` piece is integrated in `u = 1/k`
/// and closed with a two-term integration-by-parts tail.
pub fn propagate_line(q0: &GridFunction, t: f64, field: LineField) -> Result<GridFunction> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("line propagation needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return match field {
            LineField::Q => Ok(q0.clone()),
            LineField::P => grid::antiderivative(q0),
        };
    }
    let grid = *q0.grid();
    let values = q0.values();
    let y_extent = grid.start().abs().max((grid.start() + grid.length()).abs());
    let rule = quadrature::gauss_legendre(12);
    let mut out = vec![0.0; grid.n_points()];

    let symbol = |u: f64| -> Complex64 {
        let m = Complex64::from_polar(1.0, -t * u);
        match field {
            LineField::Q => m,
            LineField::P => m * Complex64::new(0.0, -u),
        }
    };

    // k in [1, π/h].
    let k_max = grid.max_wavenumber();
    let k0 = 1f64.min(k_max);
    let dk_panel = 2.5 / y_extent.max(1.0);
    let panels = ((k_max - k0) / dk_panel).ceil().max(1.0) as usize;
    let dk = (k_max - k0) / panels as f64;
    for p in 0..panels {
        let (a, b) = (k0 + p as f64 * dk, k0 + (p + 1) as f64 * dk);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let k = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let c = sampled_transform(&grid, values, k) * symbol(1.0 / k) * (0.5 * (b - a) * w);
            add_mode(&grid, c, k, &mut out);
        }
    }

    // k in (0, 1]: u = 1/k in [1, U], dk = du/u².
    let u_end = 1000f64.max(200.0 / t).max(1.0 / k0);
    let mut a = 1.0 / k0;
    while a < u_end {
        let width = (a * a / (2.0 * y_extent)).min(2.0 / t);
        let b = (a + width).min(u_end);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let u = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let c = sampled_transform(&grid, values, 1.0 / u) * symbol(u) * (0.5 * (b - a) * w / (u * u));
            add_mode(&grid, c, 1.0 / u, &mut out);
        }
        a = b;
    }

    // ∫_U^∞ G e^{-itu} du ≈ e^{-itU} [G(U)/(it) + G'(U)/(it)²], with
    // G(u) = q̂₀(1/u) a(u) e^{iy/u} / u² and a = 1 or -iu.
    let u = u_end;
    let du = 1e-3 * u;
    let amp = |u: f64| -> Complex64 {
        let a = match field {
            LineField::Q => Complex64::new(1.0, 0.0),
            LineField::P => Complex64::new(0.0, -u),
        };
        sampled_transform(&grid, values, 1.0 / u) * a / (u * u)
    };
    let (g_minus, g_mid, g_plus) = (amp(u - du), amp(u), amp(u + du));
    let it = Complex64::new(0.0, t);
    let osc = Complex64::from_polar(1.0, -t * u);
    for (j, o) in out.iter_mut().enumerate() {
        let y = grid.point(j);
        let e = |v: f64| Complex64::from_polar(1.0, y / v);
        let g = g_mid * e(u);
        let dg = (g_plus * e(u + du) - g_minus * e(u - du)) / (2.0 * du);
        *o += (osc * (g / it + dg / (it * it))).re;
    }

    let scale = 1.0 / std::f64::consts::PI;
    Ok(GridFunction::from_raw(grid, out.into_iter().map(|v| v * scale).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_derivative(grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, |y| -2.0 * y * (-y * y).exp())
    }

    fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn spectral_identity_at_zero() {
        let q = gaussian_derivative(Grid::new(20.0, 1024).unwrap());
        assert!(max_diff(&propagate_spectral(&q, 0.0).unwrap(), &q) <= 1e-14);
    }

    #[test]
    fn spectral_single_mode_is_phase_shift() {
        for m in 1..4 {
            let grid = Grid::new(PI * m as f64, 64 * m).unwrap();
            let q = GridFunction::from_fn(grid, f64::sin);
            let t = 0.7;
            let expect = GridFunction::from_fn(grid, |y| (y - t).sin());
            assert!(max_diff(&propagate_spectral(&q, t).unwrap(), &expect) < 1e-13);
        }
    }

    #[test]
    fn spectral_preserves_h1_norm() {
        let q = gaussian_derivative(Grid::new(20.0, 1024).unwrap());
        let a = grid::sobolev_norm(&q, 1.0).unwrap();
        let b = grid::sobolev_norm(&propagate_spectral(&q, 1.0).unwrap(), 1.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn spectral_rejects_mass() {
        let q = GridFunction::from_fn(Grid::new(20.0, 256).unwrap(), |y| (-y * y).exp());
        assert!(matches!(
            propagate_spectral(&q, 1.0),
            Err(Error::ZeroMassViolation { .. })
        ));
    }

    #[test]
    fn kernel_trivial_cases() {
        let grid = Grid::new(20.0, 256).unwrap();
        let q = gaussian_derivative(grid);
        assert_eq!(propagate_kernel(&q, 0.0).unwrap(), q);
        let z = GridFunction::zeros(grid);
        assert_eq!(propagate_kernel(&z, 1.0).unwrap().max_abs(), 0.0);
        assert!(propagate_kernel(&q, -1.0).is_err());
    }

    #[test]
    fn kernel_matches_line_inversion() {
        let q = gaussian_derivative(Grid::new(20.0, 2048).unwrap());
        let kernel = propagate_kernel(&q, 1.0).unwrap();
        let line = propagate_line(&q, 1.0, LineField::Q).unwrap();
        let d = max_diff(&kernel, &line);
        assert!(d <= 1e-6, "sup difference {d:e}");
    }

    #[test]
    fn p_at_zero_time_is_antiderivative() {
        let grid = Grid::new(20.0, 1024).unwrap();
        let q = gaussian_derivative(grid);
        let p = propagate_p(&q, 0.0).unwrap();
        let gauss = GridFunction::from_fn(grid, |y| (-y * y).exp());
        let d = max_diff(&p, &gauss);
        assert!(d < 1e-10, "{d:e}");
        assert!(max_diff(&p, &grid::antiderivative(&q).unwrap()) < 1e-10);
    }

    #[test]
    fn p_matches_line_inversion() {
        let q = gaussian_derivative(Grid::new(20.0, 1024).unwrap());
        let p = propagate_p(&q, 0.5).unwrap();
        let line = propagate_line(&q, 0.5, LineField::P).unwrap();
        let d = max_diff(&p, &line);
        assert!(d <= 1e-6, "sup difference {d:e}");
    }

    #[test]
    fn line_q_is_derivative_of_line_p() {
        // Interior only: the real-line P does not vanish at the right end.
        let grid = Grid::new(20.0, 1024).unwrap();
        let q = gaussian_derivative(grid);
        let p = propagate_line(&q, 0.5, LineField::P).unwrap();
        let big_q = propagate_line(&q, 0.5, LineField::Q).unwrap();
        let h = grid.spacing();
        let v = p.values();
        for j in (400..624).step_by(7) {
            let fd = (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h);
            assert!((fd - big_q.values()[j]).abs() < 1e-5);
        }
    }
}
