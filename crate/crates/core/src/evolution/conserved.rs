use serde::{Deserialize, Serialize};

use super::{check_below_one, cos_w, f_raw, SgState};
use crate::error::{Error, Result};
use crate::grid::{self, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `E₋₁, E₀, E₁` in characteristic variables.
    E,
    /// `H₋₁, H₀, H₁` in short-pulse variables.
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedTriple {
    pub e_minus1: f64,
    pub e_0: f64,
    pub e_1: f64,
    pub family: Family,
    /// Largest difference between the full trapezoid sums and the sums over
    /// every other sample.
    pub quadrature_error: f64,
}

impl ConservedTriple {
    pub fn zero(family: Family) -> Self {
        Self {
            e_minus1: 0.0,
            e_0: 0.0,
            e_1: 0.0,
            family,
            quadrature_error: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.e_minus1, self.e_0, self.e_1]
    }

    /// Periodic trapezoid sums of three densities with a halving estimate.
    pub(crate) fn from_densities(h: f64, d: [&[f64]; 3], family: Family) -> Self {
        let mut full = [0.0; 3];
        let mut half = [0.0; 3];
        for (k, dens) in d.iter().enumerate() {
            full[k] = h * dens.iter().sum::<f64>();
            half[k] = 2.0 * h * dens.iter().step_by(2).sum::<f64>();
        }
        let quadrature_error = (0..3).map(|k| (full[k] - half[k]).abs()).fold(0.0, f64::max);
        Self {
            e_minus1: full[0],
            e_0: full[1],
            e_1: full[2],
            family,
            quadrature_error,
        }
    }
}

/// `E₋₁ = ∫√(1-q²)p²`, `E₀ = ∫f(q)`, `E₁ = ∫q_y²/(1-q²)`.
pub fn conserved_e(state: &SgState) -> Result<ConservedTriple> {
    let q = state.q().values();
    check_below_one(q)?;
    let q_y = grid::derivative(state.q());
    let p = state.p().values();
    let d_minus1: Vec<f64> = q.iter().zip(p).map(|(&q, &p)| cos_w(q) * p * p).collect();
    let d_0: Vec<f64> = q.iter().map(|&q| f_raw(q)).collect();
    let d_1: Vec<f64> = q
        .iter()
        .zip(q_y.values())
        .map(|(&q, &qy)| qy * qy / (1.0 - q * q))
        .collect();
    Ok(ConservedTriple::from_densities(
        state.grid().spacing(),
        [&d_minus1, &d_0, &d_1],
        Family::E,
    ))
}

/// L² norms of `∂_t(density) - ∂_y(flux)` at the middle of three states
/// spaced `dt` apart, for the balance laws
/// `∂_t(√(1-q²)p²) = ∂_y(p_t² - p⁴/4)`, `∂_t f(q) = ∂_y(p²/2)` and
/// `∂_t(q_y²/(1-q²)) = 2 ∂_y f(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceResidual {
    pub t: f64,
    pub e_minus1: f64,
    pub e_0: f64,
    pub e_1: f64,
}

fn densities(s: &SgState) -> [GridFunction; 3] {
    let q = s.q();
    let q_y = grid::derivative(q);
    [
        q.zip_with(s.p(), |q, p| cos_w(q) * p * p),
        q.map(f_raw),
        q.zip_with(&q_y, |q, qy| qy * qy / (1.0 - q * q)),
    ]
}

pub fn balance_residual(states: [&SgState; 3], dt: f64) -> Result<BalanceResidual> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let [a, b, c] = states;
    for s in states {
        check_below_one(s.q().values())?;
    }
    let grid = *b.grid();
    if a.grid() != &grid || c.grid() != &grid {
        return Err(Error::InvalidInput("states live on different grids".into()));
    }
    let spacing_ok = |x: f64, y: f64| ((y - x) - dt).abs() <= 1e-9 * dt.max(y.abs());
    if !(spacing_ok(a.t(), b.t()) && spacing_ok(b.t(), c.t())) {
        return Err(Error::InvalidInput(
            "balance residuals need three states spaced dt apart".into(),
        ));
    }
    let da = densities(a);
    let dc = densities(c);
    let p = b.p();
    let p_t = b.p_t();
    let fluxes = [
        p_t.zip_with(p, |pt, p| pt * pt - 0.25 * p.powi(4)),
        p.map(|p| 0.5 * p * p),
        b.q().map(|q| 2.0 * f_raw(q)),
    ];
    let mut out = [0.0; 3];
    for k in 0..3 {
        let dflux = grid::derivative(&fluxes[k]);
        let r = da[k]
            .zip_with(&dc[k], |x, y| (y - x) / (2.0 * dt))
            .zip_with(&dflux, |d, f| d - f);
        out[k] = r.l2_norm();
    }
    Ok(BalanceResidual {
        t: b.t(),
        e_minus1: out[0],
        e_0: out[1],
        e_1: out[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn state(a: f64) -> SgState {
        let grid = Grid::new(20.0, 1024).unwrap();
        let q = GridFunction::from_fn(grid, |y| -2.0 * a * y * (-y * y).exp());
        SgState::new(q, 0.95).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energies() {
        let e = conserved_e(&state(0.0)).unwrap();
        assert_eq!(e.as_array(), [0.0; 3]);
    }

    #[test]
    fn e0_sits_in_the_squeeze_bracket() {
        let a = 0.05;
        let e = conserved_e(&state(a)).unwrap();
        // ∫ 4y² e^{-2y²} dy = √(π/2).
        let l2_sq = a * a * (PI / 2.0).sqrt();
        assert!(0.5 * l2_sq <= e.e_0 && e.e_0 <= l2_sq);
        assert!((state(a).q().l2_norm().powi(2) - l2_sq).abs() < 1e-14);
    }

    #[test]
    fn e1_dominates_qy_norm() {
        for &a in &[0.05, 0.2, 0.4] {
            let s = state(a);
            let qy = grid::derivative(s.q()).l2_norm();
            let e = conserved_e(&s).unwrap();
            assert!(e.e_1 >= qy * qy);
            assert!(e.e_minus1 >= 0.0 && e.e_0 >= 0.0);
        }
    }

    #[test]
    fn balance_needs_uniform_spacing() {
        let s0 = state(0.1);
        let s1 = s0.clone().with_time(0.1);
        let s2 = s0.clone().with_time(0.3);
        assert!(balance_residual([&s0, &s1, &s2], 0.1).is_err());
    }

    #[test]
    fn zero_trajectory_balances_exactly() {
        let s = state(0.0);
        let r = balance_residual(
            [&s, &s.clone().with_time(0.1), &s.clone().with_time(0.2)],
            0.1,
        )
        .unwrap();
        assert_eq!([r.e_minus1, r.e_0, r.e_1], [0.0; 3]);
    }
}
