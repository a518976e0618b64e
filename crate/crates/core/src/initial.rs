//! Synthetic zero-mass initial data.

use rand::Rng;

use crate::grid::{Grid, GridFunction};

/// `q(y) = -2A s e^{-s²}`, `s = (y - center)/width`, whose antiderivative is
/// `A·width·e^{-s²}`.
pub fn gaussian_derivative(grid: Grid, amplitude: f64, width: f64, center: f64) -> GridFunction {
    GridFunction::from_fn(grid, |y| {
        let s = (y - center) / width;
        -2.0 * amplitude * s * (-s * s).exp()
    })
}

/// `A sin(mπ(y - y₀)/L)`: a single periodic mode on the grid.
pub fn single_mode(grid: Grid, amplitude: f64, mode: usize) -> GridFunction {
    let (start, l) = (grid.start(), grid.half_width());
    GridFunction::from_fn(grid, |y| {
        amplitude * (mode as f64 * std::f64::consts::PI * (y - start) / l).sin()
    })
}

/// One to three Gaussian-derivative bumps with random widths in
/// `[0.5, 2.5]` and centers within a quarter of the half-width, rescaled so
/// that `‖q‖_∞ = peak`.
pub fn random_bumps<R: Rng + ?Sized>(grid: Grid, peak: f64, rng: &mut R) -> GridFunction {
    let count = rng.gen_range(1..=3);
    let reach = 0.25 * grid.half_width();
    let mut values = vec![0.0; grid.n_points()];
    for _ in 0..count {
        let a = rng.gen_range(-1.0..1.0);
        let width = rng.gen_range(0.5..2.5);
        let center = grid.center() + rng.gen_range(-reach..reach);
        let bump = gaussian_derivative(grid, a, width, center);
        for (v, b) in values.iter_mut().zip(bump.values()) {
            *v += b;
        }
    }
    let f = GridFunction::from_raw(grid, values);
    let m = f.max_abs();
    if m == 0.0 {
        f
    } else {
        f.scaled(peak / m)
    }
}
