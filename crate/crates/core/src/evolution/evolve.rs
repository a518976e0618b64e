use serde::{Deserialize, Serialize};

use super::step_rule::{Constants, StepRule};
use super::stepper::{step_mol, step_picard_with, PicardConfig};
use super::{conserved_e, ConservedTriple, SgState};
use crate::error::{Error, Result};
use crate::grid::{self, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stepper {
    Mol,
    Picard(PicardConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub stepper: Stepper,
    /// Upper bound on the step; the step rule may lower it.
    pub dt: f64,
    /// Record a sample every this many steps (the final state is always recorded).
    pub record_every: usize,
    /// Keep full states at the recorded samples.
    pub keep_states: bool,
    /// Constants for the local existence step rule; `None` skips the rule.
    pub constants: Option<Constants>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            stepper: Stepper::Mol,
            dt: 1e-3,
            record_every: 1,
            keep_states: false,
            constants: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// `‖q‖_∞` reached the ceiling; the trajectory ends at the last good state.
    ConstraintHalt { t: f64, max_abs: f64, limit: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub conserved: ConservedTriple,
    pub q_inf: f64,
    pub mass_residual: f64,
    pub x1_norm: f64,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// States at the samples when `keep_states` is set.
    pub states: Vec<SgState>,
    pub termination: Termination,
    pub dt: f64,
    /// Step allowed by the local existence rule at `t = 0`, if computed.
    pub rule_step: Option<f64>,
    pub notes: Vec<String>,
}

impl Trajectory {
    /// Largest `|E_i(t) - E_i(0)| / max(|E_i(0)|, floor)` over the samples.
    pub fn max_relative_drift(&self, floor: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        let Some(first) = self.samples.first() else {
            return out;
        };
        let e0 = first.conserved.as_array();
        for s in &self.samples {
            let e = s.conserved.as_array();
            for k in 0..3 {
                out[k] = f64::max(out[k], (e[k] - e0[k]).abs() / e0[k].abs().max(floor));
            }
        }
        out
    }

    pub fn max_q_inf(&self) -> f64 {
        self.samples.iter().map(|s| s.q_inf).fold(0.0, f64::max)
    }
}

fn sample(state: &SgState, flag: &str) -> Result<TrajectorySample> {
    Ok(TrajectorySample {
        t: state.t(),
        conserved: conserved_e(state)?,
        q_inf: state.q().max_abs(),
        mass_residual: grid::mass_residual(state.q()),
        x1_norm: state.x1_norm(),
        flag: flag.to_string(),
    })
}

fn picard_step(state: &SgState, dt: f64, config: &PicardConfig) -> Result<SgState> {
    match step_picard_with(state, dt, config) {
        Ok(out) => Ok(out.state),
        Err(Error::ContractionFailure { .. }) => {
            let doubled = PicardConfig {
                nodes: 2 * config.nodes,
                ..*config
            };
            match step_picard_with(state, dt, &doubled) {
                Ok(out) => Ok(out.state),
                Err(Error::ContractionFailure { .. }) if dt > 1e-8 => {
                    let mid = picard_step(state, 0.5 * dt, config)?;
                    picard_step(&mid, 0.5 * dt, config)
                }
                Err(e) => Err(e),
            }
        }
        Err(e) => Err(e),
    }
}

/// Runs `q0` to `t_final` with uniform steps no larger than `config.dt`.
pub fn evolve(q0: &GridFunction, q_c_bound: f64, t_final: f64, config: &EvolveConfig) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!("t_final must be positive, got {t_final}")));
    }
    if !(config.dt > 0.0) || config.record_every == 0 {
        return Err(Error::InvalidInput("dt and record_every must be positive".into()));
    }
    let mut state = SgState::new(q0.clone(), q_c_bound)?;
    let mut notes = Vec::new();
    let mut dt_cap = config.dt;
    let mut rule_step = None;
    if let Some(c) = &config.constants {
        match StepRule::for_state(&state, c, q_c_bound, t_final) {
            Ok((_, t)) => {
                rule_step = Some(t);
                dt_cap = dt_cap.min(t);
            }
            Err(Error::InfeasibleStep { .. }) => notes.push("rule_infeasible".to_string()),
            Err(e) => return Err(e),
        }
    }
    let n_steps = (t_final / dt_cap - 1e-9).ceil().max(1.0) as usize;
    let dt = t_final / n_steps as f64;

    let mut samples = vec![sample(&state, "")?];
    let mut states = Vec::new();
    if config.keep_states {
        states.push(state.clone());
    }
    let mut termination = Termination::Completed;
    for step in 1..=n_steps {
        let next = match &config.stepper {
            Stepper::Mol => step_mol(&state, dt),
            Stepper::Picard(pc) => picard_step(&state, dt, pc),
        };
        match next {
            Ok(s) => state = s.with_time(step as f64 * dt),
            Err(Error::StepRejected { t, max_abs, limit, .. }) => {
                termination = Termination::ConstraintHalt { t, max_abs, limit };
                break;
            }
            Err(e) => return Err(e),
        }
        if step % config.record_every == 0 || step == n_steps {
            samples.push(sample(&state, "")?);
            if config.keep_states {
                states.push(state.clone());
            }
        }
    }
    if let Termination::ConstraintHalt { .. } = termination {
        if samples.last().map(|s| s.t) != Some(state.t()) {
            samples.push(sample(&state, "halted")?);
            if config.keep_states {
                states.push(state.clone());
            }
        } else if let Some(last) = samples.last_mut() {
            last.flag = "halted".into();
        }
    }
    Ok(Trajectory {
        samples,
        states,
        termination,
        dt,
        rule_step,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::initial::gaussian_derivative;

    #[test]
    fn zero_data_gives_trivial_trajectory() {
        let grid = Grid::new(20.0, 256).unwrap();
        let cfg = EvolveConfig {
            dt: 0.1,
            ..EvolveConfig::default()
        };
        let tr = evolve(&GridFunction::zeros(grid), 0.95, 10.0, &cfg).unwrap();
        assert_eq!(tr.samples.len(), 101);
        assert_eq!(tr.termination, Termination::Completed);
        for s in &tr.samples {
            assert_eq!(s.conserved.as_array(), [0.0; 3]);
            assert_eq!((s.q_inf, s.mass_residual, s.x1_norm), (0.0, 0.0, 0.0));
        }
        assert!((tr.samples.last().unwrap().t - 10.0).abs() < 1e-12);
    }

    #[test]
    fn times_are_strictly_increasing_and_end_on_target() {
        let grid = Grid::new(20.0, 256).unwrap();
        let q = gaussian_derivative(grid, 0.1, 1.0, 0.0);
        let cfg = EvolveConfig {
            dt: 0.03,
            record_every: 7,
            ..EvolveConfig::default()
        };
        let tr = evolve(&q, 0.95, 1.0, &cfg).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(tr.samples.last().unwrap().t, 1.0);
        assert!(tr.dt <= 0.03);
    }

    #[test]
    fn guard_halts_instead_of_failing() {
        let grid = Grid::new(20.0, 256).unwrap();
        let q = gaussian_derivative(grid, 0.5, 0.7, 0.0);
        let peak = q.max_abs();
        let cfg = EvolveConfig {
            dt: 0.01,
            ..EvolveConfig::default()
        };
        let tr = evolve(&q, peak + 0.01, 5.0, &cfg).unwrap();
        match tr.termination {
            Termination::ConstraintHalt { limit, .. } => {
                assert_eq!(limit, peak + 0.01);
                assert_eq!(tr.samples.last().unwrap().flag, "halted");
            }
            Termination::Completed => assert!(tr.max_q_inf() < peak + 0.01),
        }
    }

    #[test]
    fn step_rule_caps_dt() {
        let grid = Grid::new(20.0, 256).unwrap();
        let q = gaussian_derivative(grid, 0.3, 1.0, 0.0);
        let constants = super::super::estimate_constants(&grid).unwrap();
        let cfg = EvolveConfig {
            dt: 10.0,
            constants: Some(constants),
            ..EvolveConfig::default()
        };
        let tr = evolve(&q, 0.95, 0.5, &cfg).unwrap();
        let rule = tr.rule_step.expect("rule should be feasible for A = 0.3");
        assert!(tr.dt <= rule);
    }
}
