//! Discretized L²[0,1]: uniform closed grids, trapezoidal weights and the
//! weighted inner product every other module measures with.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform closed grid on [0,1] with trapezoidal quadrature weights.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Builds the grid `x_i = i/(n-1)`, `i = 0..n`.
    pub fn new(n: usize) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::Validation(format!(
                "a quadrature grid needs at least 2 nodes, got {n}"
            )));
        }
        let intervals = (n - 1) as f64;
        let h = 1.0 / intervals;
        // i / (n-1) is correctly rounded, so x = 1/3 and x = 2/3 land exactly
        // on the nodes whenever (n-1) is a multiple of 3.
        let nodes = (0..n).map(|i| i as f64 / intervals).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Arc::new(QuadratureGrid { nodes, weights }))
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Spacing between neighbouring nodes.
    pub fn h(&self) -> f64 {
        1.0 / (self.n() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Trapezoidal approximation of ∫₀¹ f(x) dx.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

impl PartialEq for QuadratureGrid {
    fn eq(&self, other: &Self) -> bool {
        // A uniform closed grid is determined by its node count.
        self.n() == other.n()
    }
}

/// A real function sampled at the nodes of a [`QuadratureGrid`].
#[derive(Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("n", &self.grid.n())
            .field("values", &self.values)
            .finish()
    }
}

impl GridFunction {
    /// Wraps raw samples. Fails if the length is wrong or a value is not finite.
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Structural(format!(
                "{} values supplied for a grid of {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value {} at node {i}",
                values[i]
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: &Arc<QuadratureGrid>, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        GridFunction {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<QuadratureGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<QuadratureGrid>, c: f64) -> Self {
        GridFunction {
            grid: Arc::clone(grid),
            values: vec![c; grid.n()],
        }
    }

    pub(crate) fn from_raw(grid: Arc<QuadratureGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "grid functions live on grids of {} and {} nodes",
                self.grid.n(),
                other.grid.n()
            )))
        }
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &GridFunction) -> GridFunction {
        assert!(self.same_grid(other), "axpy on mismatched grids");
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    /// Weighted inner product; see [`inner`].
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        inner(self, other)
    }

    /// Weighted L² norm; see [`norm`].
    pub fn norm(&self) -> f64 {
        norm(self)
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<&GridFunction> for f64 {
    type Output = GridFunction;
    fn mul(self, rhs: &GridFunction) -> GridFunction {
        rhs.map(|v| self * v)
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|v| -v)
    }
}

/// Quadrature approximation of ∫₀¹ u v dx, i.e. Σ wᵢ uᵢ vᵢ.
pub fn inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.check_grid(v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .zip(u.grid.weights())
        .map(|((a, b), w)| w * a * b)
        .sum())
}

pub fn norm(u: &GridFunction) -> f64 {
    u.values
        .iter()
        .zip(u.grid.weights())
        .map(|(a, w)| w * a * a)
        .sum::<f64>()
        .sqrt()
}

/// `norm(u - reference) / norm(reference)`.
pub fn rel_error(u: &GridFunction, reference: &GridFunction) -> Result<f64> {
    Metric::Weighted.rel_error(u, reference)
}

/// Which vector norm measures residuals and noise levels.
///
/// The lemma checks always use [`Metric::Weighted`], the geometry in which the
/// discretized operators are monotone. The table experiments measure with the
/// plain Euclidean norm of the node vector: the schedule `a_n = C₀·δ^p/(n+s)`
/// is not scale invariant, and the published iteration counts correspond to
/// δ measured in the unweighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Weighted,
    Euclidean,
}

impl Metric {
    pub fn norm(self, u: &GridFunction) -> f64 {
        match self {
            Metric::Weighted => norm(u),
            Metric::Euclidean => u.values.iter().map(|a| a * a).sum::<f64>().sqrt(),
        }
    }

    pub fn distance(self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        u.check_grid(v)?;
        Ok(self.norm(&(u - v)))
    }

    pub fn rel_error(self, u: &GridFunction, reference: &GridFunction) -> Result<f64> {
        let denom = self.norm(reference);
        if denom == 0.0 {
            return Err(Error::Domain(
                "relative error against a zero reference".into(),
            ));
        }
        Ok(self.distance(u, reference)? / denom)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Weighted => "weighted",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" | "l2" => Ok(Metric::Weighted),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::Validation(format!("unknown norm '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_one() {
        for n in [2, 3, 30, 100, 1001] {
            let g = QuadratureGrid::new(n).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!(
                (s - 1.0).abs() <= 8.0 * f64::EPSILON * n as f64,
                "n={n}: {s}"
            );
            assert_eq!(g.nodes()[0], 0.0);
            assert_eq!(g.nodes()[n - 1], 1.0);
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(matches!(QuadratureGrid::new(1), Err(Error::Validation(_))));
    }

    #[test]
    fn constant_one_has_unit_inner() {
        let g = QuadratureGrid::new(17).unwrap();
        let one = GridFunction::constant(&g, 1.0);
        assert!((inner(&one, &one).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sine_norm_matches_closed_form() {
        let g = QuadratureGrid::new(100).unwrap();
        let s = GridFunction::from_fn(&g, |x| (3.0 * PI * x).sin());
        assert!((inner(&s, &s).unwrap() - 0.5).abs() < 1e-3);
        assert!((norm(&s) - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn zero_norm() {
        let g = QuadratureGrid::new(10).unwrap();
        assert_eq!(norm(&GridFunction::zeros(&g)), 0.0);
    }

    #[test]
    fn affine_integrands_are_exact() {
        let g = QuadratureGrid::new(37).unwrap();
        let one = GridFunction::constant(&g, 1.0);
        let lin = GridFunction::from_fn(&g, |x| 2.5 - 4.0 * x);
        // ∫ (2.5 - 4x) dx = 0.5
        assert!((inner(&one, &lin).unwrap() - 0.5).abs() <= 16.0 * f64::EPSILON);
    }

    #[test]
    fn refinement_error_shrinks_quadratically() {
        let f = |x: f64| (2.0 * x).exp() * (5.0 * x).cos();
        let exact = {
            // ∫₀¹ e^{4x} cos²(5x) dx, via fine trapezoid as reference
            let g = QuadratureGrid::new(200_001).unwrap();
            g.integrate(|x| f(x) * f(x))
        };
        let err = |n: usize| {
            let g = QuadratureGrid::new(n + 1).unwrap();
            let u = GridFunction::from_fn(&g, f);
            (inner(&u, &u).unwrap() - exact).abs()
        };
        let (e1, e2, e3) = (err(50), err(100), err(200));
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
        assert!((e2 / e3 - 4.0).abs() < 0.2, "{}", e2 / e3);
    }

    #[test]
    fn mismatched_grids_are_structural_errors() {
        let a = GridFunction::zeros(&QuadratureGrid::new(5).unwrap());
        let b = GridFunction::zeros(&QuadratureGrid::new(6).unwrap());
        assert!(matches!(inner(&a, &b), Err(Error::Structural(_))));
    }

    #[test]
    fn rel_error_cases() {
        let g = QuadratureGrid::new(20).unwrap();
        let r = GridFunction::from_fn(&g, |x| 1.0 + x * x);
        assert_eq!(rel_error(&r, &r).unwrap(), 0.0);
        assert!((rel_error(&(2.0 * &r), &r).unwrap() - 1.0).abs() < 1e-15);
        assert!((rel_error(&GridFunction::zeros(&g), &r).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            rel_error(&r, &GridFunction::zeros(&g)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn new_validates_values() {
        let g = QuadratureGrid::new(3).unwrap();
        assert!(GridFunction::new(g.clone(), vec![0.0; 2]).is_err());
        assert!(GridFunction::new(g.clone(), vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(GridFunction::new(g, vec![0.0, 1.0, 2.0]).is_ok());
    }

    #[test]
    fn euclidean_metric() {
        let g = QuadratureGrid::new(4).unwrap();
        let u = GridFunction::new(g, vec![3.0, 0.0, 0.0, 4.0]).unwrap();
        assert_eq!(Metric::Euclidean.norm(&u), 5.0);
    }
}
