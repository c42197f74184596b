//! Dynamical Systems Method drivers.
//!
//! Both drivers advance
//!
//! ```text
//! u ← u − h (F'(u) + a I)⁻¹ (F(u) + a u − f_δ)
//! ```
//!
//! and stop at the first iterate whose residual `‖F(u) − f_δ‖` drops strictly
//! below `C·δ^γ`. The discrete iteration is the `h = 1` case with the
//! schedule `a_n = c0·δ^p/(n + shift)`; the continuous driver integrates the
//! Cauchy problem with explicit Euler and `a(t) = d/(c + t)^b`, sampled at
//! the start of each step.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, Metric};
use crate::operators::OperatorModel;
use crate::regsolve::solve_shifted_linear;

/// `a_n = c0·δ^p / (n + shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteSchedule {
    pub c0: f64,
    pub delta: f64,
    pub p: f64,
    pub shift: u32,
}

impl DiscreteSchedule {
    /// The numerator `c0·δ^p`.
    pub fn scale(&self) -> f64 {
        self.c0 * self.delta.powf(self.p)
    }

    pub fn value(&self, n: usize) -> f64 {
        self.scale() / (n as f64 + self.shift as f64)
    }
}

/// Builds a validated discrete schedule.
pub fn make_schedule_discrete(c0: f64, delta: f64, p: f64, shift: u32) -> Result<DiscreteSchedule> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::Validation(format!("c0 must be positive, got {c0}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Validation(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Validation(format!(
            "exponent p must lie in (0, 1], got {p}"
        )));
    }
    if shift == 0 {
        return Err(Error::Validation(
            "schedule shift must be at least 1".into(),
        ));
    }
    Ok(DiscreteSchedule {
        c0,
        delta,
        p,
        shift,
    })
}

/// `a(t) = d / (c + t)^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSchedule {
    d: f64,
    c: f64,
    b: f64,
}

impl ContinuousSchedule {
    /// Accepts any `d, c > 0`, `b ∈ (0, 1]` without the convergence-theory
    /// constraints; query them with the `meets_*` methods.
    pub fn new(d: f64, c: f64, b: f64) -> Result<Self> {
        for (name, v) in [("d", d), ("c", c), ("b", b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if b > 1.0 {
            return Err(Error::Validation(format!(
                "exponent b must not exceed 1, got {b}"
            )));
        }
        Ok(ContinuousSchedule { d, c, b })
    }

    /// The continuous schedule that reproduces `discrete` at integer times:
    /// `d = c0·δ^p`, `c = shift`, `b = 1`.
    pub fn matching(discrete: &DiscreteSchedule) -> Result<Self> {
        Self::new(discrete.scale(), discrete.shift as f64, 1.0)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn value(&self, t: f64) -> f64 {
        self.d / (self.c + t).powf(self.b)
    }

    /// `|ȧ(t)| = b·d / (c + t)^{b+1}`.
    pub fn derivative_abs(&self, t: f64) -> f64 {
        self.b * self.d / (self.c + t).powf(self.b + 1.0)
    }

    /// `c ≥ max(2b, 1)`, which gives `|ȧ|/a ≤ 1/2`.
    pub fn meets_growth_condition(&self) -> bool {
        self.c >= (2.0 * self.b).max(1.0)
    }

    /// `c ≥ 6b`, needed by the weighted integral bound.
    pub fn meets_integral_condition(&self) -> bool {
        self.c >= 6.0 * self.b
    }

    /// `c > 6b`, the strict form assumed by the convergence theorem.
    pub fn meets_strict_integral_condition(&self) -> bool {
        self.c > 6.0 * self.b
    }
}

/// Builds a continuous schedule, rejecting `c < max(2b, 1)`.
pub fn make_schedule_continuous(d: f64, c: f64, b: f64) -> Result<ContinuousSchedule> {
    let s = ContinuousSchedule::new(d, c, b)?;
    if !s.meets_growth_condition() {
        return Err(Error::Validation(format!(
            "c = {c} violates c >= max(2b, 1) = {}",
            (2.0 * b).max(1.0)
        )));
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegularizationSchedule {
    Discrete(DiscreteSchedule),
    Continuous(ContinuousSchedule),
}

impl From<DiscreteSchedule> for RegularizationSchedule {
    fn from(s: DiscreteSchedule) -> Self {
        RegularizationSchedule::Discrete(s)
    }
}

impl From<ContinuousSchedule> for RegularizationSchedule {
    fn from(s: ContinuousSchedule) -> Self {
        RegularizationSchedule::Continuous(s)
    }
}

/// Discrepancy stopping rule: stop once `‖F(u_n) − f_δ‖ < C·δ^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub c: f64,
    pub gamma: f64,
    /// Norm in which the residual is measured.
    pub metric: Metric,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            c: 1.01,
            gamma: 0.99,
            metric: Metric::Weighted,
        }
    }
}

impl StoppingRule {
    pub fn new(c: f64, gamma: f64, metric: Metric) -> Result<Self> {
        let rule = StoppingRule { c, gamma, metric };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 1.0) || !self.c.is_finite() {
            return Err(Error::Validation(format!(
                "stopping constant C must exceed 1, got {}",
                self.c
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Validation(format!(
                "stopping exponent gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn threshold(&self, delta: f64) -> f64 {
        self.c * delta.powf(self.gamma)
    }
}

/// Trace of one DSM run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    /// The iterate at `n_stop`.
    pub final_iterate: GridFunction,
    pub n_stop: usize,
    /// `‖F(u_k) − f_δ‖` for `k = 0..=n_stop`.
    pub residuals: Vec<f64>,
    /// `a_k` for `k = 0..=n_stop`.
    pub a_values: Vec<f64>,
    pub stopped_by_discrepancy: bool,
    /// Seconds.
    pub wall_time: f64,
}

impl RunRecord {
    /// Checks the discrepancy certificate against `threshold`: every
    /// residual before `n_stop` is at least the threshold and the last one is
    /// strictly below it.
    pub fn certifies(&self, threshold: f64) -> bool {
        self.stopped_by_discrepancy
            && self.residuals.len() == self.n_stop + 1
            && self.residuals[..self.n_stop]
                .iter()
                .all(|&r| r >= threshold)
            && self.residuals[self.n_stop] < threshold
    }
}

/// The regularized Newton iteration with discrepancy stopping.
///
/// `u0 = None` starts from zero.
pub fn run_iteration(
    model: &OperatorModel,
    f_delta: &GridFunction,
    delta: f64,
    schedule: &DiscreteSchedule,
    rule: &StoppingRule,
    u0: Option<&GridFunction>,
    max_iter: usize,
) -> Result<RunRecord> {
    if max_iter == 0 {
        return Err(Error::Validation("max_iter must be at least 1".into()));
    }
    drive(model, f_delta, delta, rule, u0, max_iter, 1.0, |n| {
        schedule.value(n)
    })
}

/// Explicit Euler integration of the DSM Cauchy problem with step `h`.
#[allow(clippy::too_many_arguments)]
pub fn run_euler(
    model: &OperatorModel,
    f_delta: &GridFunction,
    delta: f64,
    schedule: &ContinuousSchedule,
    rule: &StoppingRule,
    u0: Option<&GridFunction>,
    h: f64,
    max_steps: usize,
) -> Result<RunRecord> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Validation(format!(
            "step size h must be positive, got {h}"
        )));
    }
    drive(model, f_delta, delta, rule, u0, max_steps, h, |k| {
        schedule.value(k as f64 * h)
    })
}

#[allow(clippy::too_many_arguments)]
fn drive(
    model: &OperatorModel,
    f_delta: &GridFunction,
    delta: f64,
    rule: &StoppingRule,
    u0: Option<&GridFunction>,
    max_steps: usize,
    h: f64,
    a_at: impl Fn(usize) -> f64,
) -> Result<RunRecord> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Validation(format!(
            "delta must be positive, got {delta}"
        )));
    }
    rule.validate()?;
    let started = Instant::now();
    let threshold = rule.threshold(delta);

    let mut u = match u0 {
        Some(u0) => {
            f_delta.check_grid(u0)?;
            u0.clone()
        }
        None => GridFunction::zeros(model.grid()),
    };
    let mut residuals = Vec::new();
    let mut a_values = Vec::new();
    let mut n = 0;
    let stopped = loop {
        let fu = model.apply(&u)?;
        let mismatch = &fu - f_delta;
        let r = rule.metric.norm(&mismatch);
        let a = a_at(n);
        residuals.push(r);
        a_values.push(a);
        if r < threshold {
            break true;
        }
        if n == max_steps {
            break false;
        }
        // F(u) + a u - f_δ
        let rhs = mismatch.axpy(a, &u);
        let step = solve_shifted_linear(&model.jacobian(&u)?, a, &rhs)?;
        let next = u.axpy(-h, &step);
        if !next.is_finite() {
            break false;
        }
        u = next;
        n += 1;
    };

    Ok(RunRecord {
        final_iterate: u,
        n_stop: n,
        residuals,
        a_values,
        stopped_by_discrepancy: stopped,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::QuadratureGrid;
    use crate::operators::OperatorKind;

    #[test]
    fn discrete_schedule_values() {
        let s = make_schedule_discrete(7.0, 0.01, 0.99, 1).unwrap();
        // 7 * 0.01^0.99 = 7 * exp(0.99 * ln 0.01)
        let expected = 7.0 * (0.99 * 0.01f64.ln()).exp();
        assert!((s.value(0) - expected).abs() < 1e-15);
        assert!((s.value(0) - 0.073_27).abs() < 5e-5);
        let vals: Vec<f64> = (0..50).map(|n| s.value(n)).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));

        let s2 = make_schedule_discrete(2.0, 0.05, 0.9, 6).unwrap();
        assert!((s2.value(3) - 2.0 * 0.05f64.powf(0.9) / 9.0).abs() < 1e-16);
    }

    #[test]
    fn discrete_schedule_validation() {
        assert!(make_schedule_discrete(7.0, 0.01, 0.99, 0).is_err());
        assert!(make_schedule_discrete(0.0, 0.01, 0.99, 1).is_err());
        assert!(make_schedule_discrete(1.0, -0.01, 0.99, 1).is_err());
        assert!(make_schedule_discrete(1.0, 0.01, 1.5, 1).is_err());
    }

    #[test]
    fn continuous_schedule_constraints() {
        assert!(make_schedule_continuous(1.0, 1.0, 1.0).is_err());
        let loose = ContinuousSchedule::new(1.0, 1.0, 1.0).unwrap();
        assert!(!loose.meets_growth_condition());
        assert!(!loose.meets_integral_condition());

        let s = make_schedule_continuous(1.0, 7.0, 1.0).unwrap();
        assert!(s.meets_growth_condition() && s.meets_strict_integral_condition());

        let s = make_schedule_continuous(2.0, 4.0, 0.5).unwrap();
        assert!((s.value(0.0) - 1.0).abs() < 1e-15);
        assert!(s.value(3.0) < s.value(2.0));

        assert!(ContinuousSchedule::new(1.0, 2.0, 1.5).is_err());
        assert!(ContinuousSchedule::new(-1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = make_schedule_continuous(3.0, 2.5, 0.7).unwrap();
        for t in [0.0, 1.0, 10.0] {
            let fd = (s.value(t + 1e-6) - s.value(t - 1e-6)) / 2e-6;
            assert!((s.derivative_abs(t) + fd).abs() < 1e-6);
        }
    }

    #[test]
    fn stopping_rule_validation() {
        assert!(StoppingRule::new(1.0, 0.5, Metric::Weighted).is_err());
        assert!(StoppingRule::new(1.5, 1.0, Metric::Weighted).is_err());
        assert!(StoppingRule::new(1.5, 0.5, Metric::Weighted).is_ok());
    }

    fn identity_setup() -> (OperatorModel, GridFunction) {
        let g = QuadratureGrid::new(20).unwrap();
        let m = OperatorModel::new(OperatorKind::Identity, &g);
        let f = GridFunction::from_fn(&g, |x| 1.0 + x);
        (m, f)
    }

    #[test]
    fn immediate_stop() {
        let (m, f) = identity_setup();
        let s = make_schedule_discrete(1.0, 0.1, 0.9, 1).unwrap();
        let rec = run_iteration(&m, &f, 0.1, &s, &StoppingRule::default(), Some(&f), 10).unwrap();
        assert_eq!(rec.n_stop, 0);
        assert!(rec.stopped_by_discrepancy);
        assert_eq!(rec.final_iterate, f);
    }

    #[test]
    fn identity_first_step_closed_form() {
        let (m, f) = identity_setup();
        let delta = 1e-3;
        let s = make_schedule_discrete(2.0, delta, 0.9, 1).unwrap();
        let rule = StoppingRule::default();
        let rec = run_iteration(&m, &f, delta, &s, &rule, None, 1).unwrap();
        assert_eq!(rec.n_stop, 1);
        let a0 = s.value(0);
        let expected = (1.0 / (1.0 + a0)) * &f;
        assert!((&rec.final_iterate - &expected).norm() < 1e-15);
        // Hand-unrolled: u_{n+1} = u_n - (F(u_n) + a u_n - f)/(1 + a), residual u_n - f.
        let mut u = GridFunction::zeros(f.grid());
        for n in 0..=1 {
            assert!((rec.residuals[n] - (&u - &f).norm()).abs() < 1e-15);
            let a = s.value(n);
            u = u.axpy(-1.0 / (1.0 + a), &(&u.axpy(a, &u) - &f));
        }
    }

    #[test]
    fn euler_half_steps_contract() {
        let (m, f) = identity_setup();
        let s = ContinuousSchedule::new(0.01, 1.0, 1.0).unwrap();
        let rule = StoppingRule {
            c: 1.01,
            gamma: 0.99,
            metric: Metric::Weighted,
        };
        let rec = run_euler(&m, &f, 1e-8, &s, &rule, None, 0.5, 2).unwrap();
        assert_eq!(rec.residuals.len(), 3);
        assert!(rec.residuals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn euler_zero_steps() {
        let (m, f) = identity_setup();
        let s = ContinuousSchedule::new(1.0, 1.0, 1.0).unwrap();
        let rec = run_euler(&m, &f, 1e-3, &s, &StoppingRule::default(), None, 1.0, 0).unwrap();
        assert!(!rec.stopped_by_discrepancy);
        assert_eq!(rec.n_stop, 0);
        assert_eq!(rec.final_iterate, GridFunction::zeros(f.grid()));
    }

    #[test]
    fn euler_rejects_bad_step() {
        let (m, f) = identity_setup();
        let s = ContinuousSchedule::new(1.0, 1.0, 1.0).unwrap();
        assert!(run_euler(&m, &f, 1e-3, &s, &StoppingRule::default(), None, 0.0, 5).is_err());
    }

    #[test]
    fn unstopped_run_has_consistent_trace() {
        let (m, f) = identity_setup();
        let s = make_schedule_discrete(1000.0, 1e-6, 1.0, 1).unwrap();
        let rec = run_iteration(&m, &f, 1e-6, &s, &StoppingRule::default(), None, 3).unwrap();
        assert!(!rec.stopped_by_discrepancy);
        assert_eq!(rec.n_stop, 3);
        assert_eq!(rec.residuals.len(), 4);
        assert_eq!(rec.a_values.len(), 4);
    }
}
