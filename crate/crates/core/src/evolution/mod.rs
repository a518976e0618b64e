//! Nonlinear evolution of `q = sin w` under `q_t = √(1-q²) p`, `p = ∂_y^{-1} q`.
//!
//! On the periodic box `∂_y^{-1}` is fixed up to a constant. The state carries
//! the gauge `p = P + c`, with `P` the mean-free antiderivative and `c` chosen
//! so that `∫ √(1-q²) p dy = 0`. With that choice the semi-discrete flow keeps
//! `∫ q` exactly zero and conserves all three `E` functionals, and it reduces
//! to the mean-free linear propagator for small data.

mod conserved;
mod evolve;
mod step_rule;
mod stepper;

pub use conserved::{balance_residual, conserved_e, BalanceResidual, ConservedTriple, Family};
pub use evolve::{evolve, EvolveConfig, Stepper, Termination, Trajectory, TrajectorySample};
pub use step_rule::{
    estimate_constants, estimate_constants_with, select_step, ConstantsConfig, Constants,
    StepRule, MIN_STEP,
};
pub use stepper::{step_mol, step_picard, step_picard_with, PicardConfig, PicardOutcome};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, GridFunction, Tolerances};

pub const DEFAULT_Q_C_BOUND: f64 = 0.95;

/// `f(q) = 1 - √(1-q²)`, evaluated as `q²/(1+√(1-q²))`.
pub fn f_nonlinear(q: f64) -> Result<f64> {
    if !(q.abs() <= 1.0) {
        return Err(Error::ConstraintViolation {
            max_abs: q.abs(),
            limit: 1.0,
        });
    }
    Ok(f_raw(q))
}

#[inline]
pub(crate) fn f_raw(q: f64) -> f64 {
    q * q / (1.0 + (1.0 - q * q).sqrt())
}

/// `√(1-q²)` as `1 - f(q)`.
#[inline]
pub(crate) fn cos_w(q: f64) -> f64 {
    1.0 - f_raw(q)
}

pub(crate) fn check_below_one(q: &[f64]) -> Result<()> {
    let max_abs = q.iter().fold(0f64, |m, v| m.max(v.abs()));
    if !(max_abs < 1.0) {
        return Err(Error::ConstraintViolation {
            max_abs,
            limit: 1.0,
        });
    }
    Ok(())
}

/// The flow gauge `p = P + c` for samples `q` (no checks).
pub(crate) fn flow_p(grid: &Grid, q: &[f64]) -> Vec<f64> {
    let big_p = grid::antiderivative_mean_free(&GridFunction::from_raw(*grid, q.to_vec()))
        .into_values();
    let n = q.len() as f64;
    let (mut fp, mut fsum) = (0.0, 0.0);
    for (&qi, &pi) in q.iter().zip(&big_p) {
        let f = f_raw(qi);
        fp += f * pi;
        fsum += f;
    }
    let c = (fp / n) / (1.0 - fsum / n);
    big_p.into_iter().map(|v| v + c).collect()
}

/// `q_t` of the box flow.
pub(crate) fn flow_rhs(grid: &Grid, q: &[f64]) -> Result<Vec<f64>> {
    check_below_one(q)?;
    let p = flow_p(grid, q);
    Ok(q.iter().zip(&p).map(|(&qi, &pi)| cos_w(qi) * pi).collect())
}

/// `√(1-q²) ∂_y^{-1} q` with the endpoint-normalized antiderivative.
pub fn rhs(q: &GridFunction) -> Result<GridFunction> {
    check_below_one(q.values())?;
    let p = grid::antiderivative(q)?;
    rhs_with(q, &p)
}

/// `√(1-q²) p` for a caller-supplied `p`.
pub fn rhs_with(q: &GridFunction, p: &GridFunction) -> Result<GridFunction> {
    check_below_one(q.values())?;
    if q.grid() != p.grid() {
        return Err(Error::InvalidInput("q and p live on different grids".into()));
    }
    Ok(q.zip_with(p, |qi, pi| cos_w(qi) * pi))
}

/// `(q, p)` at time `t` with `‖q‖_∞ ≤ q_c_bound < 1` and zero mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SgState {
    t: f64,
    q: GridFunction,
    p: GridFunction,
    q_c_bound: f64,
}

impl SgState {
    pub fn new(q: GridFunction, q_c_bound: f64) -> Result<Self> {
        Self::with_tolerances(q, q_c_bound, &Tolerances::default())
    }

    pub fn with_tolerances(q: GridFunction, q_c_bound: f64, tol: &Tolerances) -> Result<Self> {
        if !(q_c_bound > 0.0 && q_c_bound < 1.0) {
            return Err(Error::InvalidInput(format!(
                "q_c_bound must lie in (0, 1), got {q_c_bound}"
            )));
        }
        grid::check_zero_mass(&q, tol)?;
        let max_abs = q.max_abs();
        if max_abs > q_c_bound {
            return Err(Error::ConstraintViolation {
                max_abs,
                limit: q_c_bound,
            });
        }
        Ok(Self::from_parts(0.0, q, q_c_bound))
    }

    /// Trusted constructor for stepper output; computes the gauge.
    pub(crate) fn from_parts(t: f64, q: GridFunction, q_c_bound: f64) -> Self {
        let p = GridFunction::from_raw(*q.grid(), flow_p(q.grid(), q.values()));
        Self { t, q, p, q_c_bound }
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn q(&self) -> &GridFunction {
        &self.q
    }

    pub fn p(&self) -> &GridFunction {
        &self.p
    }

    pub fn q_c_bound(&self) -> f64 {
        self.q_c_bound
    }

    pub fn grid(&self) -> &Grid {
        self.q.grid()
    }

    /// `w = arcsin q`.
    pub fn w(&self) -> GridFunction {
        self.q.map(f64::asin)
    }

    pub fn q_t(&self) -> GridFunction {
        self.q.zip_with(&self.p, |qi, pi| cos_w(qi) * pi)
    }

    /// `∂_t p` of the gauge: `L q_t + ċ`, where `ċ` keeps
    /// `∫ √(1-q²) p dy = 0` in time.
    pub fn p_t(&self) -> GridFunction {
        let q_t = self.q_t();
        let l_qt = grid::antiderivative_mean_free(&q_t);
        let (mut num, mut den) = (0.0, 0.0);
        for (((&q, &p), &qt), &lqt) in self
            .q
            .values()
            .iter()
            .zip(self.p.values())
            .zip(q_t.values())
            .zip(l_qt.values())
        {
            let c = cos_w(q);
            num += q / c * qt * p - c * lqt;
            den += c;
        }
        let c_dot = num / den;
        l_qt.map(|v| v + c_dot)
    }

    /// `‖q‖_{H¹} + ‖p‖_{L²}` with the state's gauge.
    pub fn x1_norm(&self) -> f64 {
        grid::sobolev_norm(&self.q, 1.0).unwrap_or(f64::NAN) + self.p.l2_norm()
    }
}
