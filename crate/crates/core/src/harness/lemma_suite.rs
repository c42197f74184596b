use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{calibrate_noise, format_sig6, ExactSolution, NoiseModel};
use crate::dsm::ContinuousSchedule;
use crate::error::Result;
use crate::hilbert::{norm, GridFunction, Metric, QuadratureGrid};
use crate::lemmas::{
    build_time_trajectory, build_trajectory, check_exp_integral_inequality,
    check_gronwall_majorant, check_large_a_limit, check_phi_equals_a_psi, check_phi_psi_monotone,
    check_trajectory_residuals, check_v_bounds, check_weighted_integral_inequality,
    estimate_lipschitz_near_zero, find_t1, gronwall_recipe, log_sweep, monotonicity_gap,
    LemmaCheckReport, MarginSample,
};
use crate::operators::{OperatorKind, OperatorModel};
use crate::regsolve::{solve_regularized, NewtonOptions};

pub const LEMMA_CSV_HEADER: &str = "name,passed,worst_margin,samples";

const N_POINTS: usize = 100;
const DELTA_REL: f64 = 0.01;
const STOP_C: f64 = 2.0;

/// Runs every lemma check on one model with `y` the step function, `f = F(y)`
/// and `f_δ` perturbed by 1% sine noise. Report names are prefixed with the
/// model name.
pub fn run_lemma_suite(kind: OperatorKind) -> Result<Vec<LemmaCheckReport>> {
    let grid = QuadratureGrid::new(N_POINTS)?;
    let model = OperatorModel::new(kind, &grid);
    let y = ExactSolution::Step.sample(&grid);
    let f = model.apply(&y)?;
    let noise = NoiseModel::Sine.sample(&grid);
    let (f_delta, delta) = calibrate_noise(&f, &noise, DELTA_REL, Metric::Weighted)?;

    let a_sweep = log_sweep(10.0, 1e-4, 20);
    let traj_delta = build_trajectory(&model, &f_delta, &a_sweep)?;
    let traj_zero = build_trajectory(&model, &f, &a_sweep)?;

    let mut reports = vec![
        check_monotone_operator(&model)?,
        check_phi_psi_monotone(&traj_delta)?,
        check_phi_equals_a_psi(&traj_delta),
        check_trajectory_residuals(&model, &f_delta, &traj_delta, 1e-10)?,
        check_v_bounds(&traj_delta, &traj_zero, &y, delta)?,
        check_large_a_limit(&model, &f_delta)?,
    ];

    let schedule = ContinuousSchedule::new(10.0, 7.0, 1.0)?;
    reports.push(check_t1(&model, &f_delta, delta, &schedule)?);

    let t_grid: Vec<f64> = (0..=200).map(|i| 0.5 * i as f64).collect();
    reports.push(check_exp_integral_inequality(
        1.0,
        schedule.b(),
        schedule.c(),
        &t_grid[1..],
    )?);
    let traj_t = build_time_trajectory(&model, &f_delta, &schedule, &t_grid)?;
    reports.push(check_weighted_integral_inequality(
        &schedule, &t_grid, &traj_t,
    )?);

    let m1 = estimate_lipschitz_near_zero(&model, 20, 0x5eed)?;
    let residual0 = norm(&(&f_delta - &model.apply(&GridFunction::zeros(&grid))?));
    let (c0, c1) = (1.0, 1.0);
    let setup = gronwall_recipe(m1, norm(&y), c0, c1, residual0, 1.0, 7.0)?;
    reports.push(check_gronwall_majorant(
        &setup.schedule,
        setup.lambda,
        c0,
        c1,
        setup.g0_bound,
    )?);

    Ok(reports
        .into_iter()
        .map(|r| r.with_prefix(kind.name()))
        .collect())
}

/// `⟨F(u) − F(v), u − v⟩ ≥ 0` on random pairs, normalized by `‖u − v‖²`.
fn check_monotone_operator(model: &OperatorModel) -> Result<LemmaCheckReport> {
    let grid = model.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut details = Vec::with_capacity(100);
    for i in 0..100 {
        let scale = 3.0 * rng.random::<f64>();
        let u = GridFunction::from_fn(grid, |_| scale * rng.random_range(-1.0..1.0));
        let v = GridFunction::from_fn(grid, |_| scale * rng.random_range(-1.0..1.0));
        let d2 = norm(&(&u - &v)).powi(2);
        details.push(MarginSample {
            at: i as f64,
            margin: monotonicity_gap(model, &u, &v)? / d2,
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "monotone_operator",
        1e-12,
        false,
        details,
    ))
}

/// The discrepancy time `t₁` exists and `φ(t₁)` matches `Cδ`.
fn check_t1(
    model: &OperatorModel,
    f_delta: &GridFunction,
    delta: f64,
    schedule: &ContinuousSchedule,
) -> Result<LemmaCheckReport> {
    let t1 = find_t1(model, f_delta, delta, STOP_C, schedule)?;
    let target = STOP_C * delta;
    let rep = solve_regularized(
        model,
        f_delta,
        schedule.value(t1),
        &NewtonOptions::default(),
    )?;
    let phi = norm(&(&model.apply(&rep.solution)? - f_delta));
    let details = vec![MarginSample {
        at: t1,
        margin: 1e-6 - (phi - target).abs() / target,
    }];
    Ok(LemmaCheckReport::from_samples(
        "discrepancy_time",
        0.0,
        false,
        details,
    ))
}

pub fn emit_lemma_csv(reports: &[LemmaCheckReport]) -> String {
    let mut out = format!("{LEMMA_CSV_HEADER}\n");
    for r in reports {
        writeln!(
            out,
            "{},{},{},{}",
            r.name,
            r.passed,
            format_sig6(r.worst_margin),
            r.samples
        )
        .unwrap();
    }
    out
}

pub fn emit_lemma_table(reports: &[LemmaCheckReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut out = String::new();
    writeln!(
        out,
        "{:<width$}  {:>6}  {:>12}  {:>7}",
        "name", "passed", "worst_margin", "samples"
    )
    .unwrap();
    writeln!(out, "{}", "-".repeat(width + 33)).unwrap();
    for r in reports {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{:<width$}  {:>6}  {:>12}  {:>7}",
            r.name,
            mark,
            format_sig6(r.worst_margin),
            r.samples
        )
        .unwrap();
    }
    out
}
