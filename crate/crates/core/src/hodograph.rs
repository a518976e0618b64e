//! The map `x(y, t)` with `∂x/∂y = √(1-q²)` and the short-pulse fields
//! `u = p`, `u_x = q/√(1-q²)`, `u_xx = q_y/(1-q²)²`.
//!
//! The map is rebuilt per snapshot with the anchor `x(y_min) = anchor`. A
//! periodic `y`-box of length `2L` becomes a periodic `x`-box of length
//! `X = ∫√(1-q²) dy`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{cos_w, f_raw, ConservedTriple, Family, SgState};
use crate::grid::{self, Grid, GridFunction};
use crate::interp::{self, QuinticHermite};

#[derive(Debug, Clone, PartialEq)]
pub struct HodographFields {
    pub t: f64,
    pub y: Grid,
    pub x_of_y: Vec<f64>,
    pub u: Vec<f64>,
    pub u_x: Vec<f64>,
    pub u_xx: Vec<f64>,
    pub anchor: f64,
    /// `√(1-q²)`, the slope of the map.
    pub slope: Vec<f64>,
    /// `x`-period of the image box.
    pub period: f64,
}

impl HodographFields {
    pub fn min_slope(&self) -> f64 {
        self.slope.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `q̃ = u_x/√(1+u_x²)`, the inverse of `u_x = q/√(1-q²)`.
pub fn inverse_q(u_x: f64) -> f64 {
    u_x / (1.0 + u_x * u_x).sqrt()
}

/// `u_x = q/√(1-q²)`.
pub fn forward_u_x(q: f64) -> f64 {
    q / cos_w(q)
}

pub fn build_map(state: &SgState, anchor: f64) -> Result<HodographFields> {
    let q = state.q();
    let max_abs = q.max_abs();
    if !(max_abs < 1.0) {
        return Err(Error::NonInvertibleMap { max_abs });
    }
    let grid = *q.grid();
    let y0 = grid.start();
    let f = q.map(f_raw);
    let mean_f = f.integral() / grid.length();
    let big_f = grid::antiderivative_mean_free(&f.map(|v| v - mean_f));
    let f0 = big_f.values()[0];
    // x = anchor + ∫_{y0}^y (1 - f) = anchor + (1 - mean f)(y - y0) - (F(y) - F(y0))
    let x_of_y: Vec<f64> = grid
        .points()
        .iter()
        .zip(big_f.values())
        .map(|(&y, &bf)| anchor + (1.0 - mean_f) * (y - y0) - (bf - f0))
        .collect();
    let slope: Vec<f64> = q.values().iter().map(|&v| cos_w(v)).collect();
    if !x_of_y.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::NonInvertibleMap { max_abs });
    }
    let q_y = grid::derivative(q);
    let u_x = q.values().iter().map(|&v| forward_u_x(v)).collect();
    let u_xx = q
        .values()
        .iter()
        .zip(q_y.values())
        .map(|(&v, &qy)| qy / (1.0 - v * v).powi(2))
        .collect();
    Ok(HodographFields {
        t: state.t(),
        y: grid,
        x_of_y,
        u: state.p().values().to_vec(),
        u_x,
        u_xx,
        anchor,
        slope,
        period: (1.0 - mean_f) * grid.length(),
    })
}

/// `u`, `u_x`, `u_xx` on a uniform periodic `x`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct XFields {
    pub grid: Grid,
    pub u: GridFunction,
    pub u_x: GridFunction,
    pub u_xx: GridFunction,
    pub t: f64,
    /// `max |∂_x(resampled u) - resampled u_x|`, with `∂_x` spectral.
    pub ux_consistency: f64,
}

impl XFields {
    /// `‖u‖² + ‖u_x‖² + ‖u_xx‖²`.
    pub fn h2_norm(&self) -> f64 {
        (self.u.l2_norm().powi(2) + self.u_x.l2_norm().powi(2) + self.u_xx.l2_norm().powi(2)).sqrt()
    }
}

/// Interpolant of one field through the `x`-nodes plus one periodic image,
/// using `g_x = D_y g / √(1-q²)` and `g_xx = D_y g_x / √(1-q²)`.
fn interpolant(fields: &HodographFields, g: &[f64], g_x: Option<&[f64]>) -> Result<QuinticHermite> {
    let grid = fields.y;
    let d_x = |v: &[f64]| -> Vec<f64> {
        grid::derivative(&GridFunction::from_raw(grid, v.to_vec()))
            .values()
            .iter()
            .zip(&fields.slope)
            .map(|(d, c)| d / c)
            .collect()
    };
    let d1 = match g_x {
        Some(v) => v.to_vec(),
        None => d_x(g),
    };
    let d2 = d_x(&d1);
    let close = |v: &[f64]| {
        let mut v = v.to_vec();
        v.push(v[0]);
        v
    };
    let mut x = fields.x_of_y.clone();
    x.push(fields.x_of_y[0] + fields.period);
    QuinticHermite::new(x, close(g), close(&d1), close(&d2))
}

/// Default target grid: `n_x` points covering one `x`-period from the anchor.
pub fn x_grid(fields: &HodographFields, n_x: usize) -> Result<Grid> {
    let half = 0.5 * fields.period;
    Ok(Grid::new(half, n_x)?.centered_at(fields.x_of_y[0] + half))
}

pub fn resample_to_x(fields: &HodographFields, n_x: usize) -> Result<XFields> {
    resample_to_grid(fields, &x_grid(fields, n_x)?)
}

/// Resamples onto `target`, which must lie inside one period of the image.
pub fn resample_to_grid(fields: &HodographFields, target: &Grid) -> Result<XFields> {
    let xs = target.points();
    let lo = fields.x_of_y[0];
    let hi = lo + fields.period;
    if xs[0] < lo - 1e-12 * hi.abs().max(1.0) || target.start() + target.length() > hi + 1e-9 * hi.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "target grid [{}, {}) leaves the image [{lo}, {hi})",
            xs[0],
            target.start() + target.length()
        )));
    }
    let xs: Vec<f64> = xs.into_iter().map(|x| x.clamp(lo, hi)).collect();
    let u = interpolant(fields, &fields.u, Some(&fields.u_x))?.eval_many(&xs)?;
    let u_x = interpolant(fields, &fields.u_x, Some(&fields.u_xx))?.eval_many(&xs)?;
    let u_xx = interpolant(fields, &fields.u_xx, None)?.eval_many(&xs)?;
    let u = GridFunction::new(*target, u)?;
    let u_x = GridFunction::new(*target, u_x)?;
    let u_xx = GridFunction::new(*target, u_xx)?;
    let ux_consistency = grid::derivative(&u)
        .zip_with(&u_x, |a, b| a - b)
        .max_abs();
    Ok(XFields {
        grid: *target,
        u,
        u_x,
        u_xx,
        t: fields.t,
        ux_consistency,
    })
}

/// Samples an `x`-grid function back at the nodes `x(y_j)`.
pub fn pull_back(f: &GridFunction, fields: &HodographFields) -> Vec<f64> {
    interp::trig_interpolate(f, &fields.x_of_y)
}

/// `H₋₁ = ∫u²`, `H₀ = ∫u_x²/(1+√(1+u_x²))`, `H₁ = ∫u_xx²/(1+u_x²)^{5/2}`.
pub fn conserved_h(x: &XFields) -> ConservedTriple {
    let u = x.u.values();
    let ux = x.u_x.values();
    let uxx = x.u_xx.values();
    let d_minus1: Vec<f64> = u.iter().map(|v| v * v).collect();
    let d_0: Vec<f64> = ux.iter().map(|v| v * v / (1.0 + (1.0 + v * v).sqrt())).collect();
    let d_1: Vec<f64> = ux
        .iter()
        .zip(uxx)
        .map(|(a, b)| b * b / (1.0 + a * a).powf(2.5))
        .collect();
    ConservedTriple::from_densities(x.grid.spacing(), [&d_minus1, &d_0, &d_1], Family::H)
}

/// One chain `lower·ref ≤ measured ≤ upper·ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormChain {
    /// Norm squared on the `p` side.
    pub reference: f64,
    /// Norm squared on the `u` side.
    pub measured: f64,
    pub lower: f64,
    pub upper: f64,
    /// `measured / reference`; 1 when both vanish.
    pub ratio: f64,
    pub holds: bool,
}

impl NormChain {
    fn new(reference: f64, measured: f64, lower: f64, upper: f64) -> Self {
        let ratio = if reference == 0.0 && measured == 0.0 {
            1.0
        } else {
            measured / reference
        };
        let slack = 1e-9 * reference.max(measured);
        let holds = lower * reference - slack <= measured && measured <= upper * reference + slack;
        Self {
            reference,
            measured,
            lower,
            upper,
            ratio,
            holds,
        }
    }
}

/// The three chains with `q_c = ‖q‖_∞`:
/// `√(1-q_c²)‖p‖² ≤ ‖u‖² ≤ ‖p‖²`,
/// `‖p_y‖² ≤ ‖u_x‖² ≤ ‖p_y‖²/√(1-q_c²)`,
/// `‖p_yy‖² ≤ ‖u_xx‖² ≤ ‖p_yy‖²/(1-q_c²)^{7/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub q_c: f64,
    pub l2: NormChain,
    pub first_derivative: NormChain,
    pub second_derivative: NormChain,
    pub anchor: f64,
}

impl EquivalenceReport {
    pub fn all_hold(&self) -> bool {
        self.l2.holds && self.first_derivative.holds && self.second_derivative.holds
    }
}

pub fn equivalence_report(state: &SgState, fields: &XFields, anchor: f64) -> EquivalenceReport {
    let q_c = state.q().max_abs();
    let c = (1.0 - q_c * q_c).sqrt();
    let p = state.p().l2_norm().powi(2);
    let py = state.q().l2_norm().powi(2);
    let pyy = grid::derivative(state.q()).l2_norm().powi(2);
    EquivalenceReport {
        q_c,
        l2: NormChain::new(p, fields.u.l2_norm().powi(2), c, 1.0),
        first_derivative: NormChain::new(py, fields.u_x.l2_norm().powi(2), 1.0, 1.0 / c),
        second_derivative: NormChain::new(pyy, fields.u_xx.l2_norm().powi(2), 1.0, c.powi(-7)),
        anchor,
    }
}

/// `∫ u dx` on the `x`-grid.
pub fn zero_mass_check_u(fields: &XFields) -> f64 {
    fields.u.integral()
}
