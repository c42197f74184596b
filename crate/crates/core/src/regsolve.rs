//! Solvers for the regularized equation `F(V) + aV - f_δ = 0` at a fixed
//! shift `a > 0`, and the dense shifted linear solves behind them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{norm, GridFunction};
use crate::operators::{DenseMatrix, OperatorModel};

/// Solves `(J + aI) w = rhs` by LU with partial pivoting.
pub fn solve_shifted_linear(j: &DenseMatrix, a: f64, rhs: &GridFunction) -> Result<GridFunction> {
    if !(a > 0.0) {
        return Err(Error::Validation(format!(
            "shift a must be positive, got {a}"
        )));
    }
    if j.dim() != rhs.len() {
        return Err(Error::Structural(format!(
            "{}x{} matrix with right-hand side of length {}",
            j.dim(),
            j.dim(),
            rhs.len()
        )));
    }
    let mut m = j.clone();
    m.add_diagonal(std::iter::repeat(a));
    let x = lu_solve(m, rhs.values().to_vec())?;
    Ok(GridFunction::from_raw(Arc::clone(rhs.grid()), x))
}

/// In-place Doolittle LU with row pivoting, followed by the two triangular
/// sweeps.
fn lu_solve(mut m: DenseMatrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = m.dim();
    let scale = m.as_slice().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tiny = scale * n as f64 * f64::EPSILON;

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pmax <= tiny {
            return Err(Error::SingularPivot {
                index: k,
                magnitude: pmax,
            });
        }
        if p != k {
            for c in 0..n {
                let tmp = m[(k, c)];
                m[(k, c)] = m[(p, c)];
                m[(p, c)] = tmp;
            }
            b.swap(k, p);
        }
        let pivot = m[(k, k)];
        for i in k + 1..n {
            let l = m[(i, k)] / pivot;
            if l == 0.0 {
                continue;
            }
            m[(i, k)] = l;
            for c in k + 1..n {
                m[(i, c)] -= l * m[(k, c)];
            }
            b[i] -= l * b[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[(k, c)] * b[c]).sum();
        b[k] = (b[k] - s) / m[(k, k)];
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance on the weighted residual norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed per iteration.
    pub backtracking: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 100,
            backtracking: 30,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Validation(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RegularizedSolveReport {
    pub solution: GridFunction,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Residual of the regularized equation, `F(v) + a v - f`.
pub fn regularized_residual(
    model: &OperatorModel,
    f_delta: &GridFunction,
    a: f64,
    v: &GridFunction,
) -> Result<GridFunction> {
    f_delta.check_grid(v)?;
    let fv = model.apply(v)?;
    Ok(GridFunction::from_raw(
        Arc::clone(v.grid()),
        fv.values()
            .iter()
            .zip(v.values())
            .zip(f_delta.values())
            .map(|((fv, v), f)| fv + a * v - f)
            .collect(),
    ))
}

/// Solves `F(V) + aV = f_δ` by damped Newton starting from `V = 0`.
pub fn solve_regularized(
    model: &OperatorModel,
    f_delta: &GridFunction,
    a: f64,
    opts: &NewtonOptions,
) -> Result<RegularizedSolveReport> {
    let start = GridFunction::zeros(model.grid());
    solve_regularized_from(model, f_delta, a, &start, opts)
}

/// Same as [`solve_regularized`] with an explicit starting iterate.
///
/// A non-converged run is not an error: the report carries the best iterate
/// and `converged = false`.
pub fn solve_regularized_from(
    model: &OperatorModel,
    f_delta: &GridFunction,
    a: f64,
    start: &GridFunction,
    opts: &NewtonOptions,
) -> Result<RegularizedSolveReport> {
    opts.validate()?;
    if !(a > 0.0) {
        return Err(Error::Validation(format!(
            "shift a must be positive, got {a}"
        )));
    }
    f_delta.check_grid(start)?;

    let mut v = start.clone();
    let mut r = regularized_residual(model, f_delta, a, &v)?;
    let mut rnorm = norm(&r);
    let mut iterations = 0;

    while rnorm > opts.tol {
        if iterations == opts.max_iter {
            break;
        }
        iterations += 1;
        let step = solve_shifted_linear(&model.jacobian(&v)?, a, &r)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.backtracking {
            let trial = v.axpy(-t, &step);
            if trial.is_finite() {
                let tr = regularized_residual(model, f_delta, a, &trial)?;
                let tn = norm(&tr);
                if tn < rnorm {
                    accepted = Some((trial, tr, tn));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((nv, nr, nn)) => {
                v = nv;
                r = nr;
                rnorm = nn;
            }
            None => {
                return Ok(RegularizedSolveReport {
                    solution: v,
                    residual_norm: rnorm,
                    iterations,
                    converged: false,
                });
            }
        }
    }

    Ok(RegularizedSolveReport {
        solution: v,
        residual_norm: rnorm,
        iterations,
        converged: rnorm <= opts.tol,
    })
}
