//! Interpolation: quintic Hermite on monotone nodes and trigonometric
//! interpolation of periodic grid data.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::spectral;

/// Piecewise quintic matching values, first and second derivatives at the
/// nodes.
#[derive(Debug, Clone)]
pub struct QuinticHermite {
    x: Vec<f64>,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl QuinticHermite {
    pub fn new(x: Vec<f64>, f: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || f.len() != n || d1.len() != n || d2.len() != n {
            return Err(Error::InvalidInput("interpolant needs matching node arrays".into()));
        }
        if !x.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("interpolation nodes must increase strictly".into()));
        }
        Ok(Self { x, f, d1, d2 })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, xq: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(xq >= lo && xq <= hi) {
            return Err(Error::Domain(format!(
                "interpolation point {xq} outside [{lo}, {hi}]"
            )));
        }
        let i = (self.x.partition_point(|&v| v <= xq).max(1) - 1).min(self.x.len() - 2);
        let h = self.x[i + 1] - self.x[i];
        let s = (xq - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        let h3 = 0.5 * s3 - s4 + 0.5 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        Ok(self.f[i] * h0
            + h * self.d1[i] * h1
            + h * h * self.d2[i] * h2
            + self.f[i + 1] * h5
            + h * self.d1[i + 1] * h4
            + h * h * self.d2[i + 1] * h3)
    }

    pub fn eval_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Evaluates the trigonometric interpolant of periodic grid data at
/// arbitrary points (the Nyquist mode enters as a cosine).
pub fn trig_interpolate(f: &GridFunction, points: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n_points();
    let coeffs = spectral::forward(f.values());
    let half = n / 2;
    let x0 = grid.start();
    let k1 = spectral::wavenumber(grid, 1);
    points
        .iter()
        .map(|&x| {
            let s = x - x0;
            let step = Complex64::from_polar(1.0, k1 * s);
            let mut phase = step;
            let mut acc = coeffs[0].re;
            for (j, c) in coeffs.iter().enumerate().take(half).skip(1) {
                if j % 64 == 0 {
                    phase = Complex64::from_polar(1.0, k1 * j as f64 * s);
                }
                acc += 2.0 * (c * phase).re;
                phase *= step;
            }
            if n % 2 == 0 {
                acc += coeffs[half].re * (k1 * half as f64 * s).cos();
            } else {
                let c = coeffs[half];
                acc += 2.0 * (c * Complex64::from_polar(1.0, k1 * half as f64 * s)).re;
            }
            acc / n as f64
        })
        .collect()
}
