use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use shortpulse::bessel;
use shortpulse::certificates::{certify_state, Certificate, Verdict};
use shortpulse::evolution::{
    conserved_e, estimate_constants, evolve, ConservedTriple, EvolveConfig, SgState, Termination,
};
use shortpulse::grid::{Grid, GridFunction};
use shortpulse::hodograph::{build_map, conserved_h, equivalence_report, resample_to_x, zero_mass_check_u, EquivalenceReport};
use shortpulse::propagator::{propagate_kernel, propagate_line, LineField};

use crate::config::{ConvergenceConfig, RunConfig};
use crate::output;
use crate::CliError;

/// Outcome of a command that completed without a configuration error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Halted,
}

fn state(cfg: &RunConfig) -> Result<SgState, CliError> {
    Ok(SgState::with_tolerances(cfg.initial_q()?, cfg.q_c_bound, &cfg.tolerances)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub sum: bool,
    pub sharp: bool,
    pub raw: Option<bool>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub h_minus1: f64,
    pub h0: f64,
    pub h1: f64,
    pub sum: f64,
    pub sharp: f64,
    pub alpha_star: Option<f64>,
    pub apriori_h2: Option<f64>,
    pub raw_hypothesis: Option<f64>,
    pub verdicts: Verdicts,
}

impl From<&Certificate> for CertificateReport {
    fn from(c: &Certificate) -> Self {
        Self {
            h_minus1: c.h_minus1,
            h0: c.h_0,
            h1: c.h_1,
            sum: c.sum_criterion,
            sharp: c.sharp_criterion,
            alpha_star: c.optimal_alpha,
            apriori_h2: c.apriori_h2,
            raw_hypothesis: c.raw_hypothesis,
            verdicts: Verdicts {
                sum: c.certified_sum,
                sharp: c.certified_sharp,
                raw: c.certified_raw,
                verdict: c.verdict,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Drift {
    pub e_minus1: f64,
    pub e_0: f64,
    pub e_1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub t_final: f64,
    pub dt: f64,
    pub rule_step: Option<f64>,
    pub max_relative_drift: Drift,
    pub max_q_inf: f64,
    pub termination: Termination,
    pub initial: ConservedTriple,
    pub last: ConservedTriple,
    pub certificate: CertificateReport,
    pub notes: Vec<String>,
}

fn run_one(cfg: &RunConfig, dir: &Path) -> Result<(RunSummary, Status), CliError> {
    let s0 = state(cfg)?;
    let certificate = CertificateReport::from(&certify_state(&s0)?);
    let constants = if cfg.use_step_rule {
        Some(estimate_constants(s0.grid())?)
    } else {
        None
    };
    let tr = evolve(
        s0.q(),
        cfg.q_c_bound,
        cfg.t_final,
        &EvolveConfig {
            stepper: cfg.stepper,
            dt: cfg.dt,
            record_every: cfg.record_every,
            keep_states: false,
            constants,
        },
    )?;
    output::write_trajectory(&dir.join("trajectory.csv"), &tr.samples)?;
    let [d0, d1, d2] = tr.max_relative_drift(1e-300);
    let status = match tr.termination {
        Termination::Completed => Status::Ok,
        Termination::ConstraintHalt { .. } => Status::Halted,
    };
    let summary = RunSummary {
        t_final: tr.samples.last().map_or(0.0, |s| s.t),
        dt: tr.dt,
        rule_step: tr.rule_step,
        max_relative_drift: Drift {
            e_minus1: d0,
            e_0: d1,
            e_1: d2,
        },
        max_q_inf: tr.max_q_inf(),
        termination: tr.termination.clone(),
        initial: tr.samples[0].conserved,
        last: tr.samples.last().expect("initial sample").conserved,
        certificate,
        notes: tr.notes.clone(),
    };
    output::write_json(&dir.join("summary.json"), &summary)?;
    Ok((summary, status))
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    amplitude: f64,
    dir: PathBuf,
    summary: RunSummary,
}

pub fn simulate(cfg: &RunConfig) -> Result<Status, CliError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let Some(sweep) = &cfg.sweep else {
        let (summary, status) = run_one(cfg, dir)?;
        eprintln!(
            "max drift [{:.3e}, {:.3e}, {:.3e}], max |q| {:.6}",
            summary.max_relative_drift.e_minus1,
            summary.max_relative_drift.e_0,
            summary.max_relative_drift.e_1,
            summary.max_q_inf
        );
        return Ok(status);
    };
    if sweep.amplitudes.is_empty() {
        return Err(CliError::Config("sweep needs at least one amplitude".into()));
    }
    let runs: Vec<(SweepEntry, Status)> = sweep
        .amplitudes
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut c = cfg.clone();
            c.sweep = None;
            c.initial_data.set_amplitude(a)?;
            c.validate()?;
            let sub = dir.join(format!("run_{i:03}"));
            let (summary, status) = run_one(&c, &sub)?;
            Ok((
                SweepEntry {
                    amplitude: a,
                    dir: sub,
                    summary,
                },
                status,
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let halted = runs.iter().any(|(_, s)| *s == Status::Halted);
    let entries: Vec<SweepEntry> = runs.into_iter().map(|(e, _)| e).collect();
    output::write_json(&dir.join("sweep.json"), &entries)?;
    Ok(if halted { Status::Halted } else { Status::Ok })
}

pub fn certify(cfg: &RunConfig) -> Result<Status, CliError> {
    let s = state(cfg)?;
    let report = CertificateReport::from(&certify_state(&s)?);
    output::write_json(&cfg.output_dir.join("certificate.json"), &report)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?
    );
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct TransformReport {
    t: f64,
    /// `x(y_min) = y_min` at every evaluation time.
    anchor: f64,
    anchor_convention: &'static str,
    period: f64,
    min_slope: f64,
    ux_consistency: f64,
    u_mass: f64,
    conserved_e: ConservedTriple,
    conserved_h: ConservedTriple,
    equivalence: EquivalenceReport,
}

pub fn transform(cfg: &RunConfig) -> Result<Status, CliError> {
    let s = state(cfg)?;
    let anchor = s.grid().start();
    let map = build_map(&s, anchor)?;
    let fields = resample_to_x(&map, s.grid().n_points())?;
    output::write_fields(&cfg.output_dir.join("fields.csv"), &fields)?;
    let report = TransformReport {
        t: s.t(),
        anchor,
        anchor_convention: "x(y_min) = y_min",
        period: map.period,
        min_slope: map.min_slope(),
        ux_consistency: fields.ux_consistency,
        u_mass: zero_mass_check_u(&fields),
        conserved_e: conserved_e(&s)?,
        conserved_h: conserved_h(&fields),
        equivalence: equivalence_report(&s, &fields, anchor),
    };
    output::write_json(&cfg.output_dir.join("equivalence.json"), &report)?;
    Ok(Status::Ok)
}

pub fn kernels(times: &[f64], dir: &Path) -> Result<Status, CliError> {
    if times.is_empty() {
        return Err(CliError::Config("no times given".into()));
    }
    let rows = bessel::kernel_bounds_report(times).map_err(|e| CliError::Config(e.to_string()))?;
    output::write_kernels(&dir.join("kernels.csv"), &rows)?;
    Ok(Status::Ok)
}

/// Least-squares slope of `ln e` against `ln p`; `None` when any error is
/// zero or non-finite.
pub fn fitted_slope(rows: &[(f64, f64)]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().any(|&(p, e)| !(e > 0.0 && e.is_finite() && p > 0.0)) {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(p, e)| (p.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Serialize)]
struct ConvergenceReport {
    kind: &'static str,
    param: &'static str,
    rows: Vec<(f64, f64)>,
    order: Option<f64>,
    degenerate: bool,
}

fn diff_l2(a: &GridFunction, b: &GridFunction) -> f64 {
    a.zip_with(b, |x, y| x - y).l2_norm()
}

pub fn convergence(cfg: &RunConfig) -> Result<Status, CliError> {
    let Some(conv) = &cfg.convergence else {
        return Err(CliError::Config("no convergence ladder configured".into()));
    };
    if conv.rungs() < 3 {
        return Err(CliError::Config(format!(
            "a convergence ladder needs at least 3 rungs, got {}",
            conv.rungs()
        )));
    }
    let (kind, param, rows, order) = match conv {
        ConvergenceConfig::Dt { ladder } => {
            cfg.validate()?;
            if ladder.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
                return Err(CliError::Config("time steps must be positive".into()));
            }
            let q0 = state(cfg)?.q().clone();
            let mut finals = Vec::new();
            for &dt in ladder {
                let tr = evolve(
                    &q0,
                    cfg.q_c_bound,
                    cfg.t_final,
                    &EvolveConfig {
                        stepper: cfg.stepper,
                        dt,
                        record_every: usize::MAX,
                        keep_states: true,
                        constants: None,
                    },
                )?;
                if let Termination::ConstraintHalt { t, max_abs, limit } = tr.termination {
                    return Err(CliError::Halt(format!(
                        "run with dt = {dt} halted at t = {t}: |q| = {max_abs} reached {limit}"
                    )));
                }
                finals.push((tr.dt, tr.states.last().expect("final state").q().clone()));
            }
            // Self-convergence: each rung against the next finer one.
            let rows: Vec<(f64, f64)> = finals
                .windows(2)
                .map(|w| (w[0].0, diff_l2(&w[0].1, &w[1].1)))
                .collect();
            let order = fitted_slope(&rows);
            ("dt", "dt", rows, order)
        }
        ConvergenceConfig::N { ladder, t } => {
            if !cfg.initial_data.is_synthetic() {
                return Err(CliError::Config(
                    "a grid ladder needs synthetic initial data".into(),
                ));
            }
            let mut rows = Vec::new();
            for &n in ladder {
                let grid = Grid::new(cfg.grid.half_width, n).map_err(|e| CliError::Config(e.to_string()))?;
                let q = cfg.initial_data.build(grid)?;
                let kernel = propagate_kernel(&q, *t)?;
                let line = propagate_line(&q, *t, LineField::Q)?;
                rows.push((n as f64, kernel.zip_with(&line, |a, b| a - b).max_abs()));
            }
            let order = fitted_slope(&rows).map(|s| -s);
            ("n", "n_points", rows, order)
        }
    };
    output::write_convergence(&cfg.output_dir.join("convergence.csv"), param, &rows)?;
    let report = ConvergenceReport {
        kind,
        param,
        degenerate: order.is_none(),
        rows,
        order,
    };
    output::write_json(&cfg.output_dir.join("convergence.json"), &report)?;
    match order {
        Some(p) => println!("fitted order {p:.3}"),
        None => println!("fitted order: degenerate"),
    }
    Ok(Status::Ok)
}
