//! Regularized Dynamical Systems Method for ill-posed equations `F(u) = f`
//! with monotone operators.
//!
//! * [`hilbert`]: uniform grids on [0,1], trapezoidal weights, weighted L².
//! * [`operators`]: the exponential-kernel integral operator plus monotone
//!   pointwise nonlinearities, with exact Jacobians.
//! * [`regsolve`]: the regularized equation `F(V) + aV = f_δ`.
//! * [`dsm`]: the regularized Newton iteration and its continuous (Euler)
//!   counterpart, both stopped by the discrepancy principle.
//! * [`lemmas`]: numerical checks of the monotonicity and integral
//!   inequalities the convergence theory rests on.
//! * [`harness`]: noise models, experiment presets, CSV output and the CLI
//!   plumbing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsm;
pub mod error;
pub mod harness;
pub mod hilbert;
pub mod lemmas;
pub mod operators;
pub mod regsolve;

pub use dsm::{
    make_schedule_continuous, make_schedule_discrete, run_euler, run_iteration, ContinuousSchedule,
    DiscreteSchedule, RegularizationSchedule, RunRecord, StoppingRule,
};
pub use error::{Error, Result};
pub use hilbert::{inner, norm, rel_error, GridFunction, Metric, QuadratureGrid};
pub use operators::{matvec, DenseMatrix, OperatorKind, OperatorModel};
pub use regsolve::{
    solve_regularized, solve_regularized_from, solve_shifted_linear, NewtonOptions,
    RegularizedSolveReport,
};
