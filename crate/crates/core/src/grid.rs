//! Uniform periodic grids, grid functions, Sobolev norms and `∂_y^{-1}`.
//!
//! The real line is truncated to `[c - L, c + L)` with `N` samples and the
//! data is read as the periodic continuation of something concentrated away
//! from the ends. All norms are computed spectrally with
//! `‖f‖²_{H^s} = Σ_k (1 + k²)^s |f̂(k)|² Δk`, which at the discrete level is
//! `(h/N) Σ_j (1 + k_j²)^s |F_j|²`.

use std::io::{BufRead, Write};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n_points: usize,
    #[serde(default)]
    center: f64,
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
            center: 0.0,
        })
    }

    /// Same grid shifted so that it covers `[center - L, center + L)`.
    pub fn centered_at(self, center: f64) -> Self {
        Self { center, ..self }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn start(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn point(&self, j: usize) -> f64 {
        self.start() + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Largest resolved wavenumber `π/h`.
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }
}

/// Real samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample {} at index {j}",
                values[j]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    /// Skips validation; only for values produced by finite arithmetic on
    /// already-valid functions.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.len(), other.len(), "grid functions on different grids");
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `h Σ f_j`, the trapezoid rule under periodicity.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(j) => Err(Error::InvalidInput(format!(
                "non-finite sample {} at index {j}",
                self.values[j]
            ))),
            None => Ok(()),
        }
    }
}

/// Tolerances for the zero-mass and boundary-decay guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Mass tolerance relative to `‖q‖_{L²} √(2L)`.
    pub mass_rel: f64,
    /// Decay tolerance at the grid ends relative to `‖q‖_∞`.
    pub decay_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass_rel: 1e-8,
            decay_rel: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn mass_tolerance(&self, q: &GridFunction) -> f64 {
        self.mass_rel * q.l2_norm() * q.grid().length().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub linf: f64,
    /// `(s, ‖f‖_{H^s})` pairs in the order requested.
    pub hs: Vec<(f64, f64)>,
    /// `‖∂^{-1} f‖_{L²}`; `None` when the mass guard fails.
    pub hminus1: Option<f64>,
    pub mass_residual: f64,
    /// Largest endpoint sample relative to `‖f‖_∞`.
    pub boundary_decay: f64,
}

pub fn sobolev_norm(f: &GridFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("Sobolev order must be >= 0, got {s}")));
    }
    f.check_finite()?;
    let grid = f.grid();
    let coeffs = spectral::forward(f.values());
    let n = grid.n_points() as f64;
    let sum: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k = spectral::wavenumber(grid, j);
            (1.0 + k * k).powf(s) * c.norm_sqr()
        })
        .sum();
    Ok((grid.spacing() / n * sum).sqrt())
}

/// `h Σ q_j`.
pub fn mass_residual(q: &GridFunction) -> f64 {
    q.integral()
}

/// Largest endpoint magnitude relative to `‖q‖_∞` (0 for the zero function).
pub fn boundary_decay(q: &GridFunction) -> f64 {
    let peak = q.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let v = q.values();
    v[0].abs().max(v[v.len() - 1].abs()) / peak
}

pub fn check_zero_mass(q: &GridFunction, tol: &Tolerances) -> Result<()> {
    q.check_finite()?;
    let residual = mass_residual(q);
    let tolerance = tol.mass_tolerance(q);
    if residual.abs() > tolerance {
        return Err(Error::ZeroMassViolation {
            residual,
            tolerance,
        });
    }
    Ok(())
}

/// Spectral derivative; the Nyquist coefficient is dropped.
pub fn derivative(f: &GridFunction) -> GridFunction {
    let values = spectral::apply_symbol(
        f.grid(),
        f.values(),
        |k| Complex64::new(0.0, k),
        Complex64::new(0.0, 0.0),
    );
    GridFunction::from_raw(*f.grid(), values)
}

/// The spectral antiderivative with zero mean: symbol `1/(ik)`, zero at
/// `k = 0` and at Nyquist. No mass check.
pub fn antiderivative_mean_free(q: &GridFunction) -> GridFunction {
    let values = spectral::apply_symbol(
        q.grid(),
        q.values(),
        |k| {
            if k == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / k)
            }
        },
        Complex64::new(0.0, 0.0),
    );
    GridFunction::from_raw(*q.grid(), values)
}

/// `∂_y^{-1} q` normalized like `-∫_y^∞ q`: the mean-free spectral
/// antiderivative shifted so the two endpoint samples average to zero.
pub fn antiderivative(q: &GridFunction) -> Result<GridFunction> {
    antiderivative_with(q, &Tolerances::default())
}

pub fn antiderivative_with(q: &GridFunction, tol: &Tolerances) -> Result<GridFunction> {
    check_zero_mass(q, tol)?;
    let p = antiderivative_mean_free(q);
    let v = p.values();
    let shift = 0.5 * (v[0] + v[v.len() - 1]);
    Ok(p.map(|x| x - shift))
}

/// `‖q‖_{X^s} = ‖q‖_{H^s} + ‖∂^{-1} q‖_{L²}`.
pub fn x_norm(q: &GridFunction, s: f64) -> Result<f64> {
    x_norm_with(q, s, &Tolerances::default())
}

pub fn x_norm_with(q: &GridFunction, s: f64, tol: &Tolerances) -> Result<f64> {
    let p = antiderivative_with(q, tol)?;
    Ok(sobolev_norm(q, s)? + sobolev_norm(&p, 0.0)?)
}

pub fn norm_report(f: &GridFunction, orders: &[f64], tol: &Tolerances) -> Result<NormReport> {
    let hs = orders
        .iter()
        .map(|&s| sobolev_norm(f, s).map(|v| (s, v)))
        .collect::<Result<Vec<_>>>()?;
    let hminus1 = match antiderivative_with(f, tol) {
        Ok(p) => Some(p.l2_norm()),
        Err(Error::ZeroMassViolation { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(NormReport {
        l2: sobolev_norm(f, 0.0)?,
        linf: f.max_abs(),
        hs,
        hminus1,
        mass_residual: mass_residual(f),
        boundary_decay: boundary_decay(f),
    })
}

/// Writes `y,value` rows with 17 significant digits.
pub fn write_csv<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    writeln!(out, "y,value")?;
    for (y, v) in f.grid().points().iter().zip(f.values()) {
        writeln!(out, "{y:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Reads a `y,value` CSV; the abscissae must be uniformly spaced.
pub fn read_csv<R: BufRead>(input: R) -> Result<GridFunction> {
    let mut ys = Vec::new();
    let mut vals = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        ys.push(parse(a)?);
        vals.push(parse(b)?);
    }
    if ys.len() < MIN_POINTS {
        return Err(Error::Parse(format!(
            "need at least {MIN_POINTS} rows, got {}",
            ys.len()
        )));
    }
    let n = ys.len();
    let h = (ys[n - 1] - ys[0]) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Parse("abscissae must be increasing".into()));
    }
    for (j, y) in ys.iter().enumerate() {
        if (y - (ys[0] + j as f64 * h)).abs() > 1e-9 * h.max(y.abs()) {
            return Err(Error::Parse(format!("non-uniform spacing at row {}", j + 1)));
        }
    }
    let half_width = 0.5 * n as f64 * h;
    let grid = Grid::new(half_width, n)?.centered_at(ys[0] + half_width);
    GridFunction::new(grid, vals)
}
