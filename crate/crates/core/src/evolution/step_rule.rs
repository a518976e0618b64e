use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SgState;
use crate::bessel;
use crate::error::{Error, Result};
use crate::grid::{self, Grid};
use crate::initial;

/// Smallest step [`select_step`] will return; also its bisection resolution.
pub const MIN_STEP: f64 = 1e-4;

/// Parameters of the local existence bounds
/// `α + T(1+C_s²)δ² ≤ 1` and `αq_c + C₁√T αδ + ½C₂T(T+2)δ³ ≤ q_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    pub alpha: f64,
    pub delta: f64,
    pub q_c: f64,
    pub c_s: f64,
    pub c_1: f64,
    pub c_2: f64,
    /// Cap on the returned step.
    pub t_max: f64,
}

impl StepRule {
    fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.alpha < 1.0
            && self.delta > 0.0
            && self.delta.is_finite()
            && self.q_c > 0.0
            && self.q_c < 1.0
            && self.c_s > 0.0
            && self.c_1 > 0.0
            && self.c_2 > 0.0
            && self.t_max >= MIN_STEP;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid step rule {self:?}")))
        }
    }

    fn admits(&self, t: f64) -> bool {
        let (a, d) = (self.alpha, self.delta);
        let first = a + t * (1.0 + self.c_s * self.c_s) * d * d <= 1.0;
        let second = a * self.q_c
            + self.c_1 * t.sqrt() * a * d
            + 0.5 * self.c_2 * t * (t + 2.0) * d.powi(3)
            <= self.q_c;
        first && second
    }

    /// Scans `α ∈ {0.05, 0.10, …, 0.95}` with `δ = ‖q‖_{X¹}/α`, keeps the
    /// choices with `α q_c ≥ ‖q‖_∞`, and returns the one allowing the
    /// longest step together with that step.
    pub fn for_state(state: &SgState, constants: &Constants, q_c: f64, t_max: f64) -> Result<(Self, f64)> {
        let x = state.x1_norm();
        let q_inf = state.q().max_abs();
        let mut best: Option<(Self, f64)> = None;
        for i in 1..20 {
            let alpha = 0.05 * i as f64;
            if alpha * q_c < q_inf {
                continue;
            }
            let rule = Self {
                alpha,
                // Zero data: any δ works; keep it tiny so the cap binds.
                delta: (x / alpha).max(1e-300),
                q_c,
                c_s: constants.c_s,
                c_1: constants.c_1,
                c_2: constants.c_2,
                t_max,
            };
            if let Ok(t) = select_step(&rule) {
                if best.as_ref().is_none_or(|(_, bt)| t > *bt) {
                    best = Some((rule, t));
                }
            }
        }
        best.ok_or(Error::InfeasibleStep { min_step: MIN_STEP })
    }
}

/// Largest `T ≤ t_max` satisfying both bounds, to resolution [`MIN_STEP`].
pub fn select_step(rule: &StepRule) -> Result<f64> {
    rule.validate()?;
    if rule.admits(rule.t_max) {
        return Ok(rule.t_max);
    }
    if !rule.admits(MIN_STEP) {
        return Err(Error::InfeasibleStep { min_step: MIN_STEP });
    }
    let (mut lo, mut hi) = (MIN_STEP, rule.t_max);
    while hi - lo > MIN_STEP {
        let mid = 0.5 * (lo + hi);
        if rule.admits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    /// Number of log-spaced times in `[t_min, 10]` for `C₁`.
    pub n_times: usize,
    pub t_min: f64,
    /// Number of random states for `C₂`.
    pub n_states: usize,
    pub seed: u64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            n_times: 16,
            t_min: 1e-3,
            n_states: 64,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_s: f64,
    pub c_1: f64,
    pub c_2: f64,
    pub config: ConstantsConfig,
    /// `(t, ‖K_t‖/√t)` samples behind `C₁`.
    pub c_1_samples: Vec<(f64, f64)>,
}

const TAUS: [f64; 8] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];

pub fn estimate_constants(grid: &Grid) -> Result<Constants> {
    estimate_constants_with(grid, &ConstantsConfig::default())
}

/// `C_s = 1` (H¹ algebra constant); `C₁ = max_t ‖K_t‖_{L²}/√t` over the time
/// sample; `C₂` maximizes
/// `(‖q‖_∞²‖p‖_∞ + τ‖q‖_∞‖q‖‖p‖) / ((1+τ)‖q‖_{X¹}³)` over random zero-mass
/// states and a grid of `τ`.
pub fn estimate_constants_with(grid: &Grid, config: &ConstantsConfig) -> Result<Constants> {
    if config.n_times < 2 || config.n_states == 0 || !(config.t_min > 0.0 && config.t_min < 10.0) {
        return Err(Error::InvalidInput(format!("invalid constants config {config:?}")));
    }
    let (lo, hi) = (config.t_min.ln(), 10f64.ln());
    let c_1_samples = (0..config.n_times)
        .map(|i| {
            let t = (lo + (hi - lo) * i as f64 / (config.n_times - 1) as f64).exp();
            bessel::kernel_bounds(t).map(|b| (t, b.c_l2_fit))
        })
        .collect::<Result<Vec<_>>>()?;
    let c_1 = c_1_samples.iter().map(|s| s.1).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut c_2 = 0f64;
    for _ in 0..config.n_states {
        let q = initial::random_bumps(*grid, 0.5, &mut rng);
        let p = grid::antiderivative(&q)?;
        let x = grid::x_norm(&q, 1.0)?;
        let (q_inf, q_l2, p_inf, p_l2) = (q.max_abs(), q.l2_norm(), p.max_abs(), p.l2_norm());
        for tau in TAUS {
            let ratio = (q_inf * q_inf * p_inf + tau * q_inf * q_l2 * p_l2) / ((1.0 + tau) * x.powi(3));
            c_2 = c_2.max(ratio);
        }
    }
    Ok(Constants {
        c_s: 1.0,
        c_1,
        c_2,
        config: *config,
        c_1_samples,
    })
}
