//! Small-data certificates for global existence, the scaling law of the
//! short-pulse functionals and the time-independent `H²` bound.
//!
//! With `H₀`, `H₁` conserved, `2H₀ + H₁ < 1` certifies global existence.
//! Under `X = αx`, `U = αu` the functionals scale as `H₀ → αH₀`,
//! `H₁ → H₁/α`, so minimizing `φ(α) = 2αH₀ + H₁/α` over `α` gives the
//! scale-invariant criterion `2√(2H₀H₁) < 1`, attained at
//! `α* = √(H₁/(2H₀))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{conserved_e, cos_w, SgState};
use crate::grid::{self, Grid, GridFunction};
use crate::hodograph::{conserved_h, XFields};
use crate::interp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `2H₀ + H₁ < 1` (and hence the sharp criterion).
    CertifiedSum,
    /// Only `2√(2H₀H₁) < 1`.
    CertifiedSharp,
    Uncertified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub h_minus1: f64,
    pub h_0: f64,
    pub h_1: f64,
    /// `2H₀ + H₁`.
    pub sum_criterion: f64,
    /// `2√(2H₀H₁)`.
    pub sharp_criterion: f64,
    /// `√(H₁/(2H₀))`; `None` when `H₀` or `H₁` vanishes.
    pub optimal_alpha: Option<f64>,
    /// `None` when `2H₀ + H₁ ≥ 1`.
    pub apriori_h2: Option<f64>,
    /// `‖u₀'‖² + ‖u₀''‖²`, when the fields are available.
    pub raw_hypothesis: Option<f64>,
    pub certified_sum: bool,
    pub certified_sharp: bool,
    pub certified_raw: Option<bool>,
    pub verdict: Verdict,
}

pub fn certify_values(h_minus1: f64, h_0: f64, h_1: f64, raw_hypothesis: Option<f64>) -> Certificate {
    let sum_criterion = 2.0 * h_0 + h_1;
    let sharp_criterion = 2.0 * (2.0 * h_0 * h_1).max(0.0).sqrt();
    let certified_sum = sum_criterion < 1.0;
    let certified_sharp = sharp_criterion < 1.0;
    let verdict = if certified_sum {
        Verdict::CertifiedSum
    } else if certified_sharp {
        Verdict::CertifiedSharp
    } else {
        Verdict::Uncertified
    };
    let optimal_alpha = match phi_min(h_0, h_1) {
        PhiMin::Interior { alpha_star, .. } => Some(alpha_star),
        PhiMin::Degenerate => None,
    };
    Certificate {
        h_minus1,
        h_0,
        h_1,
        sum_criterion,
        sharp_criterion,
        optimal_alpha,
        apriori_h2: apriori_h2_bound(h_minus1, h_0, h_1),
        raw_hypothesis,
        certified_sum,
        certified_sharp,
        certified_raw: raw_hypothesis.map(|r| r < 1.0),
        verdict,
    }
}

/// Certificate from short-pulse fields on an `x`-grid.
pub fn certify_fields(fields: &XFields) -> Certificate {
    let h = conserved_h(fields);
    let raw = fields.u_x.l2_norm().powi(2) + fields.u_xx.l2_norm().powi(2);
    certify_values(h.e_minus1, h.e_0, h.e_1, Some(raw))
}

/// Certificate from a characteristic state, using `H_i = E_i`. The raw
/// hypothesis is evaluated in `y` as `∫q²/√(1-q²) + ∫q_y²(1-q²)^{-7/2}`.
pub fn certify_state(state: &SgState) -> Result<Certificate> {
    let e = conserved_e(state)?;
    let q = state.q();
    let q_y = grid::derivative(q);
    let h = state.grid().spacing();
    let raw: f64 = q
        .values()
        .iter()
        .zip(q_y.values())
        .map(|(&q, &qy)| {
            let c = cos_w(q);
            q * q / c + qy * qy / c.powi(7)
        })
        .sum::<f64>()
        * h;
    Ok(certify_values(e.e_minus1, e.e_0, e.e_1, Some(raw)))
}

/// `φ(α) = 2αH₀ + H₁/α`.
pub fn phi(alpha: f64, h_0: f64, h_1: f64) -> f64 {
    2.0 * alpha * h_0 + h_1 / alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiMin {
    Interior { alpha_star: f64, phi_star: f64 },
    /// `H₀ = 0` or `H₁ = 0`: the infimum 0 is not attained.
    Degenerate,
}

pub fn phi_min(h_0: f64, h_1: f64) -> PhiMin {
    if h_0 > 0.0 && h_1 > 0.0 {
        PhiMin::Interior {
            alpha_star: (h_1 / (2.0 * h_0)).sqrt(),
            phi_star: 2.0 * (2.0 * h_0 * h_1).sqrt(),
        }
    } else {
        PhiMin::Degenerate
    }
}

/// `(H₋₁ + S/(1-S))^{1/2}` with `S = H₁ + 2H₀`, defined for `S < 1`.
pub fn apriori_h2_bound(h_minus1: f64, h_0: f64, h_1: f64) -> Option<f64> {
    let s = h_1 + 2.0 * h_0;
    (s < 1.0).then(|| (h_minus1 + s / (1.0 - s)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledFields {
    pub fields: XFields,
    pub alpha: f64,
    pub h_0: f64,
    pub h_1: f64,
    /// `αH₀` and `H₁/α` from the unscaled functionals.
    pub expected_h_0: f64,
    pub expected_h_1: f64,
}

/// `U(X) = αu(X/α)` resampled onto a grid of `round(αN)` points covering the
/// stretched box.
pub fn scale(fields: &XFields, alpha: f64) -> Result<ScaledFields> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("scale factor must be positive, got {alpha}")));
    }
    let g = fields.grid;
    let n = ((alpha * g.n_points() as f64).round() as usize).max(grid::MIN_POINTS);
    let target = Grid::new(alpha * g.half_width(), n)?.centered_at(alpha * g.center());
    let pre: Vec<f64> = target.points().iter().map(|x| x / alpha).collect();
    let sample = |f: &GridFunction, factor: f64| -> Result<GridFunction> {
        let v = interp::trig_interpolate(f, &pre);
        GridFunction::new(target, v.into_iter().map(|v| factor * v).collect())
    };
    let u = sample(&fields.u, alpha)?;
    let u_x = sample(&fields.u_x, 1.0)?;
    let u_xx = sample(&fields.u_xx, 1.0 / alpha)?;
    let ux_consistency = grid::derivative(&u).zip_with(&u_x, |a, b| a - b).max_abs();
    let scaled = XFields {
        grid: target,
        u,
        u_x,
        u_xx,
        t: fields.t / alpha,
        ux_consistency,
    };
    let before = conserved_h(fields);
    let after = conserved_h(&scaled);
    Ok(ScaledFields {
        fields: scaled,
        alpha,
        h_0: after.e_0,
        h_1: after.e_1,
        expected_h_0: alpha * before.e_0,
        expected_h_1: before.e_1 / alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodograph::{build_map, resample_to_x};
    use crate::initial::gaussian_derivative;

    fn fields(a: f64) -> XFields {
        let grid = Grid::new(20.0, 1024).unwrap();
        let s = SgState::new(gaussian_derivative(grid, a, 1.0, 0.0), 0.95).unwrap();
        resample_to_x(&build_map(&s, -20.0).unwrap(), 1024).unwrap()
    }

    #[test]
    fn zero_data_is_certified() {
        let c = certify_fields(&fields(0.0));
        assert_eq!((c.h_minus1, c.h_0, c.h_1), (0.0, 0.0, 0.0));
        assert!(c.certified_sum && c.certified_sharp);
        assert_eq!(c.verdict, Verdict::CertifiedSum);
        assert_eq!(c.apriori_h2, Some(0.0));
    }

    #[test]
    fn arithmetic_examples() {
        let c = certify_values(0.0, 0.1, 0.2, None);
        assert!((c.sum_criterion - 0.4).abs() < 1e-15);
        assert!((c.sharp_criterion - 0.4).abs() < 1e-15);
        assert!((c.optimal_alpha.unwrap() - 1.0).abs() < 1e-15);

        let c = certify_values(0.0, 0.4, 0.3, None);
        assert!((c.sum_criterion - 1.1).abs() < 1e-15);
        assert!((c.sharp_criterion - 2.0 * 0.24f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.verdict, Verdict::CertifiedSharp);
        assert!(!c.certified_sum && c.certified_sharp);
        assert_eq!(c.apriori_h2, None);
    }

    #[test]
    fn phi_min_examples() {
        match phi_min(0.5, 0.5) {
            PhiMin::Interior { alpha_star, phi_star } => {
                assert!((alpha_star - 0.5f64.sqrt()).abs() < 1e-15);
                assert!((phi_star - 2f64.sqrt()).abs() < 1e-15);
                assert!((phi(alpha_star, 0.5, 0.5) - phi_star).abs() < 1e-15);
                assert!(phi(1.0, 0.5, 0.5) > phi_star);
            }
            d => panic!("{d:?}"),
        }
        assert_eq!(
            phi_min(0.1, 0.2),
            PhiMin::Interior {
                alpha_star: 1.0,
                phi_star: 2.0 * 0.04f64.sqrt()
            }
        );
        assert_eq!(phi_min(0.0, 0.3), PhiMin::Degenerate);
    }

    #[test]
    fn phi_grid_minimum() {
        let (h0, h1) = (0.13, 0.41);
        let PhiMin::Interior { phi_star, .. } = phi_min(h0, h1) else {
            panic!()
        };
        let n = 10_000;
        let grid_min = (0..n)
            .map(|i| {
                let a = (0.01f64.ln() + (100f64.ln() - 0.01f64.ln()) * i as f64 / (n - 1) as f64).exp();
                phi(a, h0, h1)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(grid_min >= phi_star - 1e-9);
        assert!(grid_min - phi_star < 1e-6);
    }

    #[test]
    fn apriori_bound_examples() {
        assert_eq!(apriori_h2_bound(0.0, 0.0, 0.0), Some(0.0));
        let b = apriori_h2_bound(0.01, 0.1, 0.2).unwrap();
        assert!((b - (0.01f64 + 0.4 / 0.6).sqrt()).abs() < 1e-15);
        assert!((b - 0.82260).abs() < 1e-5);
        assert_eq!(apriori_h2_bound(0.0, 0.25, 0.5), None);
    }

    #[test]
    fn scaling_identity_and_laws() {
        let f = fields(0.3);
        let s = scale(&f, 1.0).unwrap();
        assert_eq!(s.fields.grid, f.grid);
        assert!(s.fields.u.zip_with(&f.u, |a, b| a - b).max_abs() < 1e-12);
        let h = conserved_h(&f);
        let mut products = Vec::new();
        for alpha in [0.5, 1.0, 2.0, 5.0] {
            let s = scale(&f, alpha).unwrap();
            assert!((s.h_0 / s.expected_h_0 - 1.0).abs() < 1e-6);
            assert!((s.h_1 / s.expected_h_1 - 1.0).abs() < 1e-6);
            products.push(s.expected_h_0 * s.expected_h_1);
        }
        for p in products {
            assert!((p / (h.e_0 * h.e_1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sharp_verdict_is_scale_invariant() {
        let f = fields(0.3);
        let base = certify_fields(&f).certified_sharp;
        for alpha in [0.2, 0.5, 2.0, 5.0] {
            assert_eq!(certify_fields(&scale(&f, alpha).unwrap().fields).certified_sharp, base);
        }
    }

    #[test]
    fn state_and_field_certificates_agree() {
        let grid = Grid::new(20.0, 1024).unwrap();
        let s = SgState::new(gaussian_derivative(grid, 0.2, 1.0, 0.0), 0.95).unwrap();
        let a = certify_state(&s).unwrap();
        let b = certify_fields(&resample_to_x(&build_map(&s, -20.0).unwrap(), 1024).unwrap());
        assert!((a.h_0 - b.h_0).abs() < 1e-8 && (a.h_1 - b.h_1).abs() < 1e-8);
        assert!((a.raw_hypothesis.unwrap() - b.raw_hypothesis.unwrap()).abs() < 1e-7);
        assert!(a.raw_hypothesis.unwrap() >= a.sum_criterion);
    }
}
