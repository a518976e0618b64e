use serde::{Deserialize, Serialize};

use super::{flow_rhs, SgState};
use crate::error::{Error, Result};
use crate::grid::{self, GridFunction};
use crate::propagator::PropagatorPlan;
use crate::quadrature;

fn check_step(state: &SgState, t_new: f64, q: &[f64], dt: f64) -> Result<()> {
    let max_abs = q.iter().fold(0f64, |m, v| m.max(v.abs()));
    if !(max_abs < state.q_c_bound()) {
        return Err(Error::StepRejected {
            t: t_new,
            max_abs,
            limit: state.q_c_bound(),
            suggested_dt: 0.5 * dt,
        });
    }
    Ok(())
}

/// One classical RK4 step of `q_t = √(1-q²) p`.
pub fn step_mol(state: &SgState, dt: f64) -> Result<SgState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let grid = *state.grid();
    let q0 = state.q().values();
    let t_new = state.t() + dt;
    let stage = |base: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(b, k)| b + a * k).collect()
    };
    let rejected = |e: Error| match e {
        Error::ConstraintViolation { max_abs, .. } => Error::StepRejected {
            t: t_new,
            max_abs,
            limit: state.q_c_bound(),
            suggested_dt: 0.5 * dt,
        },
        e => e,
    };
    let k1 = flow_rhs(&grid, q0).map_err(rejected)?;
    let k2 = flow_rhs(&grid, &stage(q0, &k1, 0.5 * dt)).map_err(rejected)?;
    let k3 = flow_rhs(&grid, &stage(q0, &k2, 0.5 * dt)).map_err(rejected)?;
    let k4 = flow_rhs(&grid, &stage(q0, &k3, dt)).map_err(rejected)?;
    let q: Vec<f64> = (0..q0.len())
        .map(|i| q0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    check_step(state, t_new, &q, dt)?;
    let q = GridFunction::new(grid, q)?;
    Ok(SgState::from_parts(t_new, q, state.q_c_bound()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Gauss–Lobatto nodes on `[0, T]`.
    pub nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            nodes: 4,
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub state: SgState,
    /// `X¹` distance between successive iterates, one entry per iteration.
    pub distances: Vec<f64>,
}

impl PicardOutcome {
    pub fn iterations(&self) -> usize {
        self.distances.len()
    }
}

pub fn step_picard(state: &SgState, t_step: f64, tol: f64, max_iter: usize) -> Result<PicardOutcome> {
    step_picard_with(
        state,
        t_step,
        &PicardConfig {
            tol,
            max_iter,
            ..PicardConfig::default()
        },
    )
}

/// `∫₀^{τ_i} ℓ_j(s) ds` for the Lagrange basis on `nodes`.
fn integration_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let rule = quadrature::gauss_legendre(n);
    let basis = |j: usize, s: f64| -> f64 {
        (0..n)
            .filter(|&m| m != j)
            .map(|m| (s - nodes[m]) / (nodes[j] - nodes[m]))
            .product()
    };
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if nodes[i] == nodes[0] {
                        0.0
                    } else {
                        quadrature::integrate(|s| basis(j, s), nodes[0], nodes[i], &rule)
                    }
                })
                .collect()
        })
        .collect()
}

/// Duhamel iteration in the interaction picture. With `L` the mean-free
/// antiderivative and `N(q) = Lq - √(1-q²)p`,
/// `q(τ) = e^{τL}[q₀ - ∫₀^τ e^{-sL} N(q(s)) ds]`; the integrand is
/// collocated at Gauss–Lobatto nodes. Starts from `q = e^{τL} q₀`.
pub fn step_picard_with(state: &SgState, t_step: f64, config: &PicardConfig) -> Result<PicardOutcome> {
    if !(t_step > 0.0 && t_step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {t_step}")));
    }
    if config.nodes < 2 || !(config.tol > 0.0) || config.max_iter == 0 {
        return Err(Error::InvalidInput(format!("invalid Picard config {config:?}")));
    }
    let grid = *state.grid();
    let (x, _) = quadrature::gauss_lobatto(config.nodes);
    let taus: Vec<f64> = x.iter().map(|x| 0.5 * t_step * (x + 1.0)).collect();
    let s = integration_matrix(&taus);
    let forward: Vec<PropagatorPlan> = taus
        .iter()
        .map(|&t| PropagatorPlan::spectral(grid, t))
        .collect::<Result<_>>()?;
    let backward: Vec<PropagatorPlan> = taus
        .iter()
        .map(|&t| PropagatorPlan::spectral(grid, -t))
        .collect::<Result<_>>()?;

    let q0 = state.q().values();
    let mut iterate: Vec<Vec<f64>> = forward.iter().map(|e| e.apply_values(q0)).collect();
    let mut distances = Vec::new();
    let mut growth = 0;
    loop {
        let v: Vec<Vec<f64>> = iterate
            .iter()
            .zip(&backward)
            .map(|(q, back)| {
                let qt = flow_rhs(&grid, q)?;
                let lq = grid::antiderivative_mean_free(&GridFunction::from_raw(grid, q.clone()));
                let n: Vec<f64> = lq.values().iter().zip(&qt).map(|(a, b)| a - b).collect();
                Ok(back.apply_values(&n))
            })
            .collect::<Result<_>>()?;
        let next: Vec<Vec<f64>> = (0..taus.len())
            .map(|i| {
                let mut w = q0.to_vec();
                for (j, vj) in v.iter().enumerate() {
                    let sij = s[i][j];
                    if sij != 0.0 {
                        for (w, vj) in w.iter_mut().zip(vj) {
                            *w -= sij * vj;
                        }
                    }
                }
                forward[i].apply_values(&w)
            })
            .collect();
        let d = next
            .iter()
            .zip(&iterate)
            .map(|(a, b)| {
                let diff = GridFunction::from_raw(grid, a.iter().zip(b).map(|(a, b)| a - b).collect());
                grid::sobolev_norm(&diff, 1.0).unwrap_or(f64::INFINITY)
                    + grid::antiderivative_mean_free(&diff).l2_norm()
            })
            .fold(0.0, f64::max);
        iterate = next;
        if let Some(&last) = distances.last() {
            growth = if d > last { growth + 1 } else { 0 };
        }
        distances.push(d);
        if !d.is_finite() || growth >= 3 {
            return Err(Error::ContractionFailure { distances });
        }
        if d <= config.tol {
            break;
        }
        if distances.len() >= config.max_iter {
            return Err(Error::ConvergenceFailure {
                iterations: distances.len(),
                tol: config.tol,
                last: d,
            });
        }
    }
    let q_end = iterate.pop().expect("at least two nodes");
    let t_new = state.t() + t_step;
    check_step(state, t_new, &q_end, t_step)?;
    let q = GridFunction::new(grid, q_end)?;
    Ok(PicardOutcome {
        state: SgState::from_parts(t_new, q, state.q_c_bound()),
        distances,
    })
}
