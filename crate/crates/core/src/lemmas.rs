//! Executable checks of the auxiliary inequalities behind the DSM
//! convergence theory.
//!
//! Every check returns a [`LemmaCheckReport`] instead of failing: the
//! report's `worst_margin` is the most adverse slack observed, normalized so
//! that a positive value means the inequality held with room to spare.
//! All norms here are the quadrature-weighted L² norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsm::ContinuousSchedule;
use crate::error::{Error, Result};
use crate::hilbert::{inner, norm, GridFunction};
use crate::operators::{matvec, DenseMatrix, OperatorModel};
use crate::regsolve::{regularized_residual, solve_regularized_from, NewtonOptions};

/// Slack at one sample point of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginSample {
    /// Where the sample was taken (a shift `a`, a time `t`, ...).
    pub at: f64,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct LemmaCheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_margin: f64,
    /// The check passes iff `worst_margin >= -tolerance`, or `> 0` when
    /// `strict` is set.
    pub tolerance: f64,
    pub strict: bool,
    pub samples: usize,
    pub details: Vec<MarginSample>,
}

impl LemmaCheckReport {
    pub fn from_samples(
        name: &str,
        tolerance: f64,
        strict: bool,
        details: Vec<MarginSample>,
    ) -> Self {
        let worst_margin = details
            .iter()
            .map(|s| s.margin)
            .fold(f64::INFINITY, |w, m| {
                if m.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    w.min(m)
                }
            });
        let passed = if strict {
            worst_margin > 0.0
        } else {
            worst_margin >= -tolerance
        };
        LemmaCheckReport {
            name: name.to_string(),
            passed,
            worst_margin,
            tolerance,
            strict,
            samples: details.len(),
            details,
        }
    }

    /// Prefixes the report name, e.g. with the model it ran on.
    pub fn with_prefix(mut self, prefix: &str) -> Self {
        self.name = format!("{prefix}/{}", self.name);
        self
    }
}

/// Solutions `V(a)` of `F(V) + aV = f_δ` along a decreasing sweep of shifts,
/// with `φ(a) = ‖F(V) − f_δ‖` and `ψ(a) = ‖V‖`.
#[derive(Debug, Clone)]
pub struct VTrajectory {
    a_values: Vec<f64>,
    points: Vec<GridFunction>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    residuals: Vec<f64>,
}

impl VTrajectory {
    pub fn a_values(&self) -> &[f64] {
        &self.a_values
    }

    pub fn points(&self) -> &[GridFunction] {
        &self.points
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// Residuals of the regularized equation at each point.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn len(&self) -> usize {
        self.a_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_values.is_empty()
    }
}

fn check_strictly_decreasing(a_values: &[f64]) -> Result<()> {
    if a_values.is_empty() {
        return Err(Error::Validation("empty shift sequence".into()));
    }
    if let Some(a) = a_values.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(Error::Validation(format!(
            "shift values must be positive, got {a}"
        )));
    }
    if let Some(w) = a_values.windows(2).find(|w| !(w[1] < w[0])) {
        return Err(Error::Validation(format!(
            "shift values must be strictly decreasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `n` log-spaced values from `hi` down to `lo`.
pub fn log_sweep(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo && lo > 0.0);
    let (lh, ll) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| (lh + (ll - lh) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Solves the regularized equation along `a_values`, warm-starting each
/// solve from the previous solution. Each point is polished past the default
/// tolerance.
pub fn build_trajectory(
    model: &OperatorModel,
    f_delta: &GridFunction,
    a_values: &[f64],
) -> Result<VTrajectory> {
    check_strictly_decreasing(a_values)?;
    let opts = NewtonOptions::default();
    let mut start = GridFunction::zeros(model.grid());
    let mut traj = VTrajectory {
        a_values: a_values.to_vec(),
        points: Vec::with_capacity(a_values.len()),
        phi: Vec::with_capacity(a_values.len()),
        psi: Vec::with_capacity(a_values.len()),
        residuals: Vec::with_capacity(a_values.len()),
    };
    for &a in a_values {
        let rep = solve_regularized_from(model, f_delta, a, &start, &opts)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                a,
                residual: rep.residual_norm,
            });
        }
        // Full Newton steps down to the rounding floor, so φ and aψ agree to
        // working precision even when both are small.
        let polish = NewtonOptions {
            tol: f64::MIN_POSITIVE,
            max_iter: 6,
            backtracking: 0,
        };
        let rep = solve_regularized_from(model, f_delta, a, &rep.solution, &polish)?;
        let v = rep.solution;
        traj.phi.push(norm(&(&model.apply(&v)? - f_delta)));
        traj.psi.push(norm(&v));
        traj.residuals.push(rep.residual_norm);
        start = v.clone();
        traj.points.push(v);
    }
    Ok(traj)
}

/// Builds the trajectory on a time grid, `a_i = a(t_i)`.
pub fn build_time_trajectory(
    model: &OperatorModel,
    f_delta: &GridFunction,
    schedule: &ContinuousSchedule,
    t_values: &[f64],
) -> Result<VTrajectory> {
    let a: Vec<f64> = t_values.iter().map(|&t| schedule.value(t)).collect();
    build_trajectory(model, f_delta, &a)
}

/// `φ` strictly decreasing and `ψ` strictly increasing as `a` decreases.
///
/// Margins are relative per-step changes; the check tolerates `1e-9`.
pub fn check_phi_psi_monotone(traj: &VTrajectory) -> Result<LemmaCheckReport> {
    check_strictly_decreasing(&traj.a_values)?;
    if traj.len() < 2 {
        return Err(Error::Validation(
            "need at least two trajectory points".into(),
        ));
    }
    if traj.psi.contains(&0.0) {
        return Err(Error::Validation(
            "trajectory passes through V = 0; requires F(0) != f_delta".into(),
        ));
    }
    let mut details = Vec::with_capacity(2 * (traj.len() - 1));
    for k in 0..traj.len() - 1 {
        let at = traj.a_values[k + 1];
        details.push(MarginSample {
            at,
            margin: (traj.phi[k] - traj.phi[k + 1]) / traj.phi[k],
        });
        details.push(MarginSample {
            at,
            margin: (traj.psi[k + 1] - traj.psi[k]) / traj.psi[k + 1],
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "phi_psi_monotone",
        1e-9,
        false,
        details,
    ))
}

/// `φ(a) = a·ψ(a)` at every point, to `1e-12` relative.
pub fn check_phi_equals_a_psi(traj: &VTrajectory) -> LemmaCheckReport {
    let tol = 1e-12;
    let details = traj
        .a_values
        .iter()
        .zip(traj.phi.iter().zip(&traj.psi))
        .map(|(&a, (&phi, &psi))| {
            let scale = phi.abs().max(a * psi).max(f64::MIN_POSITIVE);
            MarginSample {
                at: a,
                margin: -((phi - a * psi).abs() / scale),
            }
        })
        .collect();
    LemmaCheckReport::from_samples("phi_equals_a_psi", tol, false, details)
}

/// Every point satisfies the regularized equation to within `tol`.
pub fn check_trajectory_residuals(
    model: &OperatorModel,
    f_delta: &GridFunction,
    traj: &VTrajectory,
    tol: f64,
) -> Result<LemmaCheckReport> {
    let mut details = Vec::with_capacity(traj.len());
    for (&a, v) in traj.a_values.iter().zip(&traj.points) {
        let r = norm(&regularized_residual(model, f_delta, a, v)?);
        details.push(MarginSample {
            at: a,
            margin: tol - r,
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "regularized_residuals",
        0.0,
        false,
        details,
    ))
}

/// Stability bounds of the regularized solutions against the noise-free
/// trajectory `V` and an exact solution `y`:
/// `‖V_δ − V‖ ≤ δ/a`, `‖V‖ ≤ ‖y‖`, `‖V_δ‖ ≤ ‖y‖ + δ/a`.
pub fn check_v_bounds(
    traj_delta: &VTrajectory,
    traj_zero: &VTrajectory,
    y: &GridFunction,
    delta: f64,
) -> Result<LemmaCheckReport> {
    if traj_delta.a_values != traj_zero.a_values {
        return Err(Error::Structural(
            "trajectories were computed on different shift grids".into(),
        ));
    }
    if !(delta >= 0.0) {
        return Err(Error::Validation(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let y_norm = norm(y);
    let tolerance = 10.0 * NewtonOptions::default().tol + 1e-9;
    let mut details = Vec::with_capacity(3 * traj_delta.len());
    for (k, &a) in traj_delta.a_values.iter().enumerate() {
        let vd = &traj_delta.points[k];
        let v = &traj_zero.points[k];
        vd.check_grid(y)?;
        let gap = norm(&(vd - v));
        details.push(MarginSample {
            at: a,
            margin: delta / a - gap,
        });
        details.push(MarginSample {
            at: a,
            margin: y_norm - norm(v),
        });
        details.push(MarginSample {
            at: a,
            margin: y_norm + delta / a - norm(vd),
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "v_bounds", tolerance, false, details,
    ))
}

/// Weighted operator norm of `J`, i.e. `sup ‖Jx‖/‖x‖` in the quadrature
/// inner product, by power iteration on `J*J`.
pub fn weighted_operator_norm(j: &DenseMatrix, probe: &GridFunction, steps: usize) -> Result<f64> {
    let w = probe.grid().weights().to_vec();
    let mut x = probe.clone();
    let mut estimate = 0.0;
    for _ in 0..steps {
        let nx = norm(&x);
        if nx == 0.0 {
            return Ok(0.0);
        }
        x = (1.0 / nx) * &x;
        let jx = matvec(j, &x)?;
        estimate = norm(&jx);
        // J* = W⁻¹ Jᵀ W in the weighted inner product.
        let wjx: Vec<f64> = jx.values().iter().zip(&w).map(|(v, w)| v * w).collect();
        let n = w.len();
        let mut adj = vec![0.0; n];
        for (i, &wi) in wjx.iter().enumerate() {
            for (c, a) in adj.iter_mut().enumerate() {
                *a += j[(i, c)] * wi;
            }
        }
        for (a, wc) in adj.iter_mut().zip(&w) {
            *a /= wc;
        }
        x = GridFunction::new(x.grid().clone(), adj)?;
    }
    Ok(estimate)
}

/// Largest weighted Jacobian norm over `samples` random points of the unit
/// ball around 0 (plus 0 itself).
pub fn estimate_lipschitz_near_zero(
    model: &OperatorModel,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let grid = model.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = GridFunction::from_fn(grid, |x| 1.0 + 0.5 * (3.0 * x).sin());
    let mut best =
        weighted_operator_norm(&model.jacobian(&GridFunction::zeros(grid))?, &probe, 50)?;
    for _ in 0..samples {
        let dir = GridFunction::from_fn(grid, |_| rng.random_range(-1.0..1.0));
        let radius: f64 = rng.random_range(0.0..1.0);
        let u = (radius / norm(&dir)) * &dir;
        best = best.max(weighted_operator_norm(&model.jacobian(&u)?, &probe, 50)?);
    }
    Ok(best)
}

/// Behaviour for large shifts: `‖V‖ ≤ ‖f_δ − F(0)‖/a` and
/// `|‖F(V) − f_δ‖ − ‖F(0) − f_δ‖| ≤ M₁‖V‖` for `a ∈ {10², 10³, 10⁴}`.
pub fn check_large_a_limit(
    model: &OperatorModel,
    f_delta: &GridFunction,
) -> Result<LemmaCheckReport> {
    let opts = NewtonOptions::default();
    let zero = GridFunction::zeros(model.grid());
    let r0 = norm(&(f_delta - &model.apply(&zero)?));
    let m1 = estimate_lipschitz_near_zero(model, 10, 0x5eed)?;
    let mut details = Vec::new();
    for a in [1e2, 1e3, 1e4] {
        let rep = solve_regularized_from(model, f_delta, a, &zero, &opts)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                a,
                residual: rep.residual_norm,
            });
        }
        let v_norm = norm(&rep.solution);
        let phi = norm(&(&model.apply(&rep.solution)? - f_delta));
        details.push(MarginSample {
            at: a,
            margin: r0 / a + opts.tol - v_norm,
        });
        details.push(MarginSample {
            at: a,
            margin: m1 * v_norm + opts.tol - (phi - r0).abs(),
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "large_a_limit",
        0.0,
        false,
        details,
    ))
}

/// Finds the unique `t₁` with `‖F(V_δ(t₁)) − f_δ‖ = Cδ` for the shift
/// schedule `a(t)`, to `|φ(t₁) − Cδ| ≤ 1e-8`.
pub fn find_t1(
    model: &OperatorModel,
    f_delta: &GridFunction,
    delta: f64,
    c: f64,
    schedule: &ContinuousSchedule,
) -> Result<f64> {
    const TOL: f64 = 1e-8;
    const T_CAP: f64 = (1u64 << 30) as f64;
    if !(c > 1.0) {
        return Err(Error::Validation(format!("C must exceed 1, got {c}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Validation(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let target = c * delta;
    let zero = GridFunction::zeros(model.grid());
    let r0 = norm(&(f_delta - &model.apply(&zero)?));
    if !(r0 > target) {
        return Err(Error::Validation(format!(
            "‖F(0) − f_δ‖ = {r0:e} does not exceed Cδ = {target:e}"
        )));
    }

    let opts = NewtonOptions::default();
    let mut warm = zero;
    let mut phi = |t: f64| -> Result<f64> {
        let a = schedule.value(t);
        let rep = solve_regularized_from(model, f_delta, a, &warm, &opts)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                a,
                residual: rep.residual_norm,
            });
        }
        let value = norm(&(&model.apply(&rep.solution)? - f_delta));
        warm = rep.solution;
        Ok(value)
    };

    let phi0 = phi(0.0)?;
    if !(phi0 > target) {
        return Err(Error::Validation(format!(
            "φ(0) = {phi0:e} does not exceed Cδ = {target:e}; a(0) is too small"
        )));
    }
    if (phi0 - target).abs() <= TOL {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let v = phi(hi)?;
        if (v - target).abs() <= TOL {
            return Ok(hi);
        }
        if v < target {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > T_CAP {
            return Err(Error::Validation(format!(
                "φ(t) stays above Cδ up to t = {T_CAP:e}"
            )));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = phi(mid)?;
        if (v - target).abs() <= TOL {
            return Ok(mid);
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// Composite Simpson rule with `panels` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    debug_assert!(panels.is_multiple_of(2));
    let h = (hi - lo) / panels as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..panels {
        let x = lo + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// `(p − b/c) ∫₀ᵗ e^{ps}/(s+c)^b ds < e^{pt}/(c+t)^b` at each `t`.
///
/// The margin is `1 − LHS/RHS`, evaluated with the integrand rescaled by
/// `e^{-pt}` so large `t` does not overflow.
pub fn check_exp_integral_inequality(
    p: f64,
    b: f64,
    c: f64,
    t_values: &[f64],
) -> Result<LemmaCheckReport> {
    for (name, v) in [("p", p), ("b", b), ("c", c)] {
        if !(v > 0.0) {
            return Err(Error::Validation(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if let Some(t) = t_values.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Validation(format!("t must be nonnegative, got {t}")));
    }
    let prefactor = p - b / c;
    let details = t_values
        .iter()
        .map(|&t| {
            let ratio = if t == 0.0 || prefactor == 0.0 {
                0.0
            } else {
                let integral = simpson(
                    |s| (p * (s - t)).exp() * ((c + t) / (c + s)).powf(b),
                    0.0,
                    t,
                    10_000,
                );
                prefactor * integral
            };
            MarginSample {
                at: t,
                margin: 1.0 - ratio,
            }
        })
        .collect();
    Ok(LemmaCheckReport::from_samples(
        "exp_integral_inequality",
        0.0,
        true,
        details,
    ))
}

/// `e^{−t/2} ∫₀ᵗ e^{s/2} |ȧ(s)| ‖V_δ(s)‖ ds ≤ ½ a(t) ‖V_δ(t)‖` along a
/// trajectory sampled at `t_values` (which must start at 0).
///
/// The integral is accumulated by the trapezoid rule in the rescaled form
/// `I(t_{k+1}) = e^{−Δ/2} I(t_k) + Δ/2 (e^{−Δ/2} g(t_k) + g(t_{k+1}))`.
pub fn check_weighted_integral_inequality(
    schedule: &ContinuousSchedule,
    t_values: &[f64],
    traj: &VTrajectory,
) -> Result<LemmaCheckReport> {
    if !schedule.meets_integral_condition() {
        return Err(Error::Validation(format!(
            "schedule violates c >= 6b (c = {}, b = {})",
            schedule.c(),
            schedule.b()
        )));
    }
    if t_values.len() != traj.len() || t_values.first() != Some(&0.0) {
        return Err(Error::Structural(
            "time grid must start at 0 and match the trajectory length".into(),
        ));
    }
    let t_max = *t_values.last().unwrap();
    for (w, k) in t_values.windows(2).zip(1..) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation(
                "time grid must be strictly increasing".into(),
            ));
        }
        if w[1] - w[0] > 0.01 * t_max + 1e-12 {
            return Err(Error::Validation(format!(
                "time step {} at index {k} exceeds 1% of t_max",
                w[1] - w[0]
            )));
        }
    }
    for (&t, &a) in t_values.iter().zip(&traj.a_values) {
        let expect = schedule.value(t);
        if (a - expect).abs() > 1e-12 * expect {
            return Err(Error::Structural(format!(
                "trajectory shift {a} does not match a({t}) = {expect}"
            )));
        }
    }
    let g = |k: usize| schedule.derivative_abs(t_values[k]) * traj.psi[k];
    let mut integral = 0.0;
    let mut details = Vec::with_capacity(t_values.len());
    for k in 0..t_values.len() {
        if k > 0 {
            let dt = t_values[k] - t_values[k - 1];
            let decay = (-0.5 * dt).exp();
            integral = decay * integral + 0.5 * dt * (decay * g(k - 1) + g(k));
        }
        let rhs = 0.5 * traj.a_values[k] * traj.psi[k];
        details.push(MarginSample {
            at: t_values[k],
            margin: (rhs - integral) / rhs,
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "weighted_integral_inequality",
        0.0,
        true,
        details,
    ))
}

/// Parameters produced by the constructive recipe for the Gronwall-type
/// majorant: a schedule and `λ` such that the differential inequality
/// `ġ ≤ −g + (c₀/a) g² + c₁ |ȧ|/a` keeps `g < a/λ`.
#[derive(Debug, Clone, Copy)]
pub struct GronwallSetup {
    pub schedule: ContinuousSchedule,
    pub lambda: f64,
    /// Upper bound `‖F(0) − f_δ‖ / a(0)` on `g(0)` for the start `u₀ = 0`.
    pub g0_bound: f64,
}

/// Builds `a(t) = d/(c+t)^b` and `λ` from `M₁, ‖y‖, c₀, c₁` and
/// `‖F(0) − f_δ‖`:
///
/// * `λ = M₁/‖y‖`
/// * `d = max(√(c^{2b} λ ‖F(0) − f_δ‖), 4bλc₁)`
/// * then `a ← κa`, `λ ← κλ` with `κ > max(4c₀/λ, 1)`.
pub fn gronwall_recipe(
    m1: f64,
    y_norm: f64,
    c0: f64,
    c1: f64,
    residual0: f64,
    b: f64,
    c: f64,
) -> Result<GronwallSetup> {
    if !(m1 > 0.0 && y_norm > 0.0) {
        return Err(Error::Validation("M1 and ‖y‖ must be positive".into()));
    }
    if !(c0 >= 0.0 && c1 >= 0.0 && residual0 >= 0.0) {
        return Err(Error::Validation(
            "c0, c1 and the initial residual must be nonnegative".into(),
        ));
    }
    let lambda = m1 / y_norm;
    let d = (c.powf(2.0 * b) * lambda * residual0)
        .sqrt()
        .max(4.0 * b * lambda * c1)
        .max(f64::MIN_POSITIVE);
    // 1% above the bound keeps every inequality strict.
    let kappa = 1.01 * (4.0 * c0 / lambda).max(1.0);
    let schedule = super::dsm::make_schedule_continuous(kappa * d, c, b)?;
    Ok(GronwallSetup {
        schedule,
        lambda: kappa * lambda,
        g0_bound: residual0 / schedule.value(0.0),
    })
}

/// Integrates the equality `ġ = −g + α g² + β` with `α = c₀/a(t)`,
/// `β = c₁ |ȧ|/a(t)` by RK4 (step `1e-3`) on `[0, 100]` and checks
/// `g(t) < a(t)/λ`.
///
/// Preconditions, checked on the same grid:
/// `α ≤ (μ/2)(1 − μ̇/μ)`, `β ≤ (1/(2μ))(1 − μ̇/μ)` and `μ(0) g₀ < 1`,
/// where `μ = λ/a`.
pub fn check_gronwall_majorant(
    schedule: &ContinuousSchedule,
    lambda: f64,
    c0: f64,
    c1: f64,
    g0: f64,
) -> Result<LemmaCheckReport> {
    const STEP: f64 = 1e-3;
    const T_END: f64 = 100.0;
    if !(lambda > 0.0) {
        return Err(Error::Validation(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(c0 >= 0.0 && c1 >= 0.0 && g0 >= 0.0) {
        return Err(Error::Validation(
            "c0, c1 and g0 must be nonnegative".into(),
        ));
    }
    let a = |t: f64| schedule.value(t);
    let rate = |t: f64| schedule.derivative_abs(t) / schedule.value(t);
    let alpha = |t: f64| c0 / a(t);
    let beta = |t: f64| c1 * rate(t);
    let mu = |t: f64| lambda / a(t);

    let steps = (T_END / STEP).round() as usize;
    let mut failures = Vec::new();
    if !(mu(0.0) * g0 < 1.0) {
        failures.push(format!("mu(0) g0 = {} is not below 1", mu(0.0) * g0));
    }
    for i in 0..=steps {
        let t = i as f64 * STEP;
        let slack = 1.0 - rate(t);
        if alpha(t) > 0.5 * mu(t) * slack {
            failures.push(format!("alpha <= mu/2 (1 - mu'/mu) fails at t = {t}"));
            break;
        }
        if beta(t) > slack / (2.0 * mu(t)) {
            failures.push(format!("beta <= (1 - mu'/mu)/(2 mu) fails at t = {t}"));
            break;
        }
    }
    if !failures.is_empty() {
        return Err(Error::Validation(failures.join("; ")));
    }

    let rhs = |t: f64, g: f64| -g + alpha(t) * g * g + beta(t);
    let mut g = g0;
    let mut details = Vec::with_capacity(steps + 1);
    let margin = |t: f64, g: f64| 1.0 - mu(t) * g;
    details.push(MarginSample {
        at: 0.0,
        margin: margin(0.0, g),
    });
    for i in 0..steps {
        let t = i as f64 * STEP;
        let k1 = rhs(t, g);
        let k2 = rhs(t + 0.5 * STEP, g + 0.5 * STEP * k1);
        let k3 = rhs(t + 0.5 * STEP, g + 0.5 * STEP * k2);
        let k4 = rhs(t + STEP, g + STEP * k3);
        g += STEP / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = (i + 1) as f64 * STEP;
        details.push(MarginSample {
            at: t_next,
            margin: margin(t_next, g),
        });
    }
    Ok(LemmaCheckReport::from_samples(
        "gronwall_majorant",
        0.0,
        true,
        details,
    ))
}

/// Monotonicity of `F` on sampled pairs: `⟨F(u) − F(v), u − v⟩ ≥ 0`.
pub fn monotonicity_gap(model: &OperatorModel, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    inner(&(&model.apply(u)? - &model.apply(v)?), &(u - v))
}
