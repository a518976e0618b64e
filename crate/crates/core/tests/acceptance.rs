//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shortpulse::bessel::kernel_bounds;
use shortpulse::certificates::{certify_fields, certify_state, phi, phi_min, scale, PhiMin};
use shortpulse::evolution::{
    conserved_e, estimate_constants, evolve, step_mol, step_picard, EvolveConfig, SgState, StepRule, Stepper,
    Termination, Trajectory,
};
use shortpulse::grid::{self, Grid, GridFunction};
use shortpulse::hodograph::{build_map, conserved_h, inverse_q, pull_back, resample_to_x, zero_mass_check_u};
use shortpulse::initial::{gaussian_derivative, random_bumps};
use shortpulse::propagator::{propagate_kernel, propagate_line, propagate_spectral, LineField};
use shortpulse::Result;

const L: f64 = 20.0;
const N: usize = 1024;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn grid() -> Grid {
    Grid::new(L, N).expect("grid")
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.zip_with(b, |x, y| x - y).max_abs()
}

fn max_diff_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_states(count: usize, seed: u64, peak: (f64, f64)) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = rng.gen_range(peak.0..peak.1);
            random_bumps(grid(), p, &mut rng)
        })
        .collect()
}

fn norm_preservation() -> Result<Outcome> {
    let mut worst = 0f64;
    for q in random_states(20, 11, (0.05, 0.8)) {
        for t in [0.1, 1.0, 10.0] {
            let out = propagate_spectral(&q, t)?;
            for s in [0.0, 1.0, 2.0] {
                let a = grid::sobolev_norm(&q, s)?;
                let b = grid::sobolev_norm(&out, s)?;
                worst = worst.max((b - a).abs() / a);
            }
        }
    }
    Ok(Outcome::new(worst <= 1e-12, format!("max relative change {worst:.2e}")))
}

fn kernel_equivalence() -> Result<Outcome> {
    let mut errors = Vec::new();
    let mut box_gap = 0.0;
    for n in [256, 512, 1024, 2048] {
        let g = Grid::new(L, n)?;
        let q = gaussian_derivative(g, 0.5, 1.0, 0.0);
        let kernel = propagate_kernel(&q, 1.0)?;
        let line = propagate_line(&q, 1.0, LineField::Q)?;
        errors.push(max_diff(&kernel, &line));
        if n == 2048 {
            box_gap = max_diff(&kernel, &propagate_spectral(&q, 1.0)?);
        }
    }
    let last = *errors.last().unwrap();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let ladder: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(Outcome::new(
        last <= 1e-6 && monotone,
        format!(
            "kernel vs line at N=2048 {last:.2e}, ladder [{}]; periodic box multiplier differs by {box_gap:.2e}",
            ladder.join(", ")
        ),
    ))
}

fn kernel_bounds_check() -> Result<Outcome> {
    let ts = [0.1, 1.0, 2.0, 10.0];
    let b: Vec<_> = ts.iter().map(|&t| kernel_bounds(t)).collect::<Result<_>>()?;
    let sup_err = b.iter().map(|b| (b.sup_k - b.t).abs()).fold(0.0, f64::max);
    let c: Vec<f64> = b.iter().map(|b| b.c_l2_fit).collect();
    let (lo, hi) = c.iter().fold((f64::INFINITY, 0f64), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = (hi - lo) / lo;
    let sup_j = b.iter().map(|b| (b.sup_j - 1.0).abs()).fold(0.0, f64::max);
    Ok(Outcome::new(
        sup_err <= 1e-6 && spread <= 0.02 && sup_j <= 1e-12,
        format!("max |sup K - t| {sup_err:.2e}, L2 constant spread {:.2}%, |sup J - 1| {sup_j:.1e}", 100.0 * spread),
    ))
}

fn run(q: &GridFunction, t_final: f64, dt: f64, record_every: usize, keep: bool) -> Result<Trajectory> {
    evolve(
        q,
        0.95,
        t_final,
        &EvolveConfig {
            stepper: Stepper::Mol,
            dt,
            record_every,
            keep_states: keep,
            constants: None,
        },
    )
}

fn conservation() -> Result<Outcome> {
    let q = gaussian_derivative(grid(), 0.1, 1.0, 0.0);
    let cert = certify_state(&SgState::new(q.clone(), 0.95)?)?;
    let fine = run(&q, 5.0, 1e-3, 50, false)?.max_relative_drift(1e-12);
    let coarse = run(&q, 5.0, 0.1, 1, false)?.max_relative_drift(1e-12);
    let half = run(&q, 5.0, 0.05, 1, false)?.max_relative_drift(1e-12);
    let ratios: Vec<f64> = (0..3).map(|k| coarse[k] / half[k]).collect();
    let worst = fine.iter().copied().fold(0.0, f64::max);
    let order_ok = ratios.iter().all(|&r| r >= 13.0);
    Ok(Outcome::new(
        cert.certified_sum && worst <= 1e-6 && order_ok,
        format!(
            "drift at dt=1e-3 [{:.1e}, {:.1e}, {:.1e}]; halving 0.1 -> 0.05 shrinks drift by [{:.1}, {:.1}, {:.1}]",
            fine[0], fine[1], fine[2], ratios[0], ratios[1], ratios[2]
        ),
    ))
}

fn identity_h_e() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0f64;
    let mut used = 0;
    while used < 20 {
        let peak = rng.gen_range(0.05..0.7);
        let q = random_bumps(grid(), peak, &mut rng);
        let s = SgState::new(q, 0.95)?;
        if !certify_state(&s)?.certified_sharp {
            continue;
        }
        used += 1;
        let e = conserved_e(&s)?.as_array();
        let x = resample_to_x(&build_map(&s, grid().start())?, N)?;
        let h = conserved_h(&x).as_array();
        for k in 0..3 {
            worst = worst.max((h[k] - e[k]).abs() / e[k].abs().max(1.0));
        }
    }
    Ok(Outcome::new(worst <= 1e-5, format!("max |H - E|/max(1,|E|) {worst:.2e} over 20 states")))
}

/// Certified initial data used for the trajectory criteria: three Gaussian
/// derivatives plus two certified random draws.
fn certified_cases() -> Result<Vec<GridFunction>> {
    let is_certified = |q: &GridFunction| -> Result<bool> {
        Ok(certify_state(&SgState::new(q.clone(), 0.95)?)?.certified_sum)
    };
    let mut out = Vec::new();
    for q in [
        gaussian_derivative(grid(), 0.1, 1.0, 0.0),
        gaussian_derivative(grid(), 0.3, 1.0, 0.0),
        gaussian_derivative(grid(), 0.4, 2.0, 1.0),
    ] {
        assert!(is_certified(&q)?);
        out.push(q);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    while out.len() < 5 {
        let peak = rng.gen_range(0.2..0.4);
        let q = random_bumps(grid(), peak, &mut rng);
        if is_certified(&q)? {
            out.push(q);
        }
    }
    Ok(out)
}

fn apriori_bounds() -> Result<Outcome> {
    let mut slack_inf = f64::INFINITY;
    let mut slack_x1 = f64::INFINITY;
    for q in certified_cases()? {
        let tr = run(&q, 5.0, 1e-3, 10, false)?;
        let [em1, e0, e1] = tr.samples[0].conserved.as_array();
        let q_c = (0.5 * (e1 + 2.0 * e0)).sqrt();
        let bound_inf = q_c + 1e-4;
        let bound_x1 = (e1 + 2.0 * e0).sqrt() + (em1 / (1.0 - q_c * q_c).sqrt()).sqrt() + 1e-3;
        for s in &tr.samples {
            slack_inf = slack_inf.min(bound_inf - s.q_inf);
            slack_x1 = slack_x1.min(bound_x1 - s.x1_norm);
        }
    }
    Ok(Outcome::new(
        slack_inf >= 0.0 && slack_x1 >= 0.0,
        format!("min slack: sup norm {slack_inf:.3e}, X1 norm {slack_x1:.3e}"),
    ))
}

fn apriori_h2() -> Result<Outcome> {
    let mut slack = f64::INFINITY;
    let mut checked = 0;
    for q in certified_cases()? {
        let tr = run(&q, 5.0, 1e-3, 500, true)?;
        let bound = certify_state(&tr.states[0])?.apriori_h2.expect("certified");
        for s in &tr.states {
            let x = resample_to_x(&build_map(s, grid().start())?, N)?;
            slack = slack.min(bound + 1e-3 - x.h2_norm());
            checked += 1;
        }
    }
    Ok(Outcome::new(slack >= 0.0, format!("min slack {slack:.3e} over {checked} states")))
}

fn picard_contraction() -> Result<Outcome> {
    let g = grid();
    let s = SgState::new(gaussian_derivative(g, 0.3, 1.0, 0.0), 0.95)?;
    let constants = estimate_constants(&g)?;
    let (_, t) = StepRule::for_state(&s, &constants, 0.95, 10.0)?;
    let tol = 1e-12;
    let out = step_picard(&s, t, tol, 200)?;
    let d = &out.distances;
    // Ratios are measured above the roundoff floor.
    let ratios: Vec<f64> = d.windows(2).filter(|w| w[1] > 1e3 * tol).map(|w| w[1] / w[0]).collect();
    let geometric = !ratios.is_empty() && ratios.iter().all(|&r| r < 1.0);
    let steps = ((t / 2e-3).ceil() as usize).max(200);
    let mut mol = s.clone();
    for _ in 0..steps {
        mol = step_mol(&mol, t / steps as f64)?;
    }
    let gap = max_diff(out.state.q(), mol.q());
    let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(Outcome::new(
        geometric && gap <= tol.max(1e-5),
        format!(
            "T = {t:.4}, {} iterations, max ratio {worst_ratio:.3}, endpoint vs MOL {gap:.2e}",
            d.len()
        ),
    ))
}

fn round_trip() -> Result<Outcome> {
    let mut cases: Vec<GridFunction> = [0.3, 0.6, 0.9]
        .iter()
        .map(|&p| {
            let q = gaussian_derivative(grid(), 1.0, 1.0, 0.0);
            q.scaled(p / q.max_abs())
        })
        .collect();
    cases.extend(random_states(5, 31, (0.5, 0.9)));
    let mut worst = 0f64;
    for q in cases {
        let s = SgState::new(q, 0.95)?;
        let f = build_map(&s, grid().start())?;
        let x = resample_to_x(&f, N)?;
        let back = pull_back(&x.u_x.map(inverse_q), &f);
        worst = worst.max(max_diff_slices(&back, s.q().values()));
    }
    Ok(Outcome::new(worst <= 1e-5, format!("max sup error {worst:.2e}")))
}

fn scaling() -> Result<Outcome> {
    let s = SgState::new(gaussian_derivative(grid(), 0.3, 1.0, 0.0), 0.95)?;
    let x = resample_to_x(&build_map(&s, grid().start())?, N)?;
    let mut worst = 0f64;
    for alpha in [0.5, 2.0] {
        let sc = scale(&x, alpha)?;
        worst = worst
            .max((sc.h_0 / sc.expected_h_0 - 1.0).abs())
            .max((sc.h_1 / sc.expected_h_1 - 1.0).abs());
    }
    let c = certify_fields(&x);
    let PhiMin::Interior { alpha_star, phi_star } = phi_min(c.h_0, c.h_1) else {
        return Ok(Outcome::new(false, "degenerate functionals".into()));
    };
    let n = 1_000_000;
    let (lo, hi) = ((alpha_star / 100.0).ln(), (alpha_star * 100.0).ln());
    let grid_min = (0..=n)
        .map(|i| phi((lo + (hi - lo) * i as f64 / n as f64).exp(), c.h_0, c.h_1))
        .fold(f64::INFINITY, f64::min);
    let gap = (grid_min - 2.0 * (2.0 * c.h_0 * c.h_1).sqrt()).abs();
    Ok(Outcome::new(
        worst <= 1e-6 && gap <= 1e-9,
        format!("max relative scaling error {worst:.2e}; phi grid minimum off by {gap:.1e} (phi* = {phi_star:.6})"),
    ))
}

fn zero_mass_u() -> Result<Outcome> {
    let q = gaussian_derivative(grid(), 0.15, 2.0, 0.0);
    let s0 = SgState::new(q.clone(), 0.95)?;
    assert!(certify_state(&s0)?.certified_sum);
    // u = ∂_y⁻¹q with the far-field value taken as zero.
    let u0 = grid::antiderivative(&q)?;
    let mass0: f64 = u0.values().iter().zip(q.values()).map(|(u, q)| u * (1.0 - q * q).sqrt()).sum::<f64>()
        * grid().spacing();
    let tr = run(&q, 1.0, 1e-3, 1000, true)?;
    assert_eq!(tr.termination, Termination::Completed);
    let end = tr.states.last().expect("final state");
    let x = resample_to_x(&build_map(end, grid().start())?, N)?;
    let mass1 = zero_mass_check_u(&x);
    Ok(Outcome::new(
        mass1.abs() <= 1e-6 && mass0.abs() >= 0.5,
        format!("u-mass at t=0 {mass0:.4}, at t=1 {mass1:.2e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("linear norm preservation", norm_preservation),
        ("kernel vs Fourier inversion", kernel_equivalence),
        ("kernel bounds", kernel_bounds_check),
        ("conservation and stepper order", conservation),
        ("H and E agree", identity_h_e),
        ("a priori sup and X1 bounds", apriori_bounds),
        ("a priori H2 bound", apriori_h2),
        ("Picard contraction", picard_contraction),
        ("hodograph round trip", round_trip),
        ("scaling laws", scaling),
        ("zero mass of u", zero_mass_u),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
