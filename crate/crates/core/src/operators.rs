//! Monotone operator models on a quadrature grid.
//!
//! The nonlinear models are `F(u) = B u + g(u)` where
//! `(B u)(x) = ∫₀¹ e^{-|x-y|} u(y) dy` is discretized with the grid's
//! trapezoidal weights and `g` is a monotone pointwise nonlinearity.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, QuadratureGrid};

/// Square dense matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{})", self.n, self.n)
    }
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data of length `n*n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Structural(format!(
                "{} entries cannot form a {n}x{n} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Adds `diag[i]` to entry `(i, i)`.
    pub fn add_diagonal(&mut self, diag: impl IntoIterator<Item = f64>) {
        for (i, d) in diag.into_iter().take(self.n).enumerate() {
            self.data[i * self.n + i] += d;
        }
    }

    pub fn mul_slice(&self, w: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Standard matrix-vector product `J w`.
pub fn matvec(j: &DenseMatrix, w: &GridFunction) -> Result<GridFunction> {
    if j.dim() != w.len() {
        return Err(Error::Structural(format!(
            "{}x{} matrix applied to a vector of length {}",
            j.dim(),
            j.dim(),
            w.len()
        )));
    }
    Ok(GridFunction::from_raw(
        Arc::clone(w.grid()),
        j.mul_slice(w.values()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `B u + arctan(u)³`
    ArctanCubed,
    /// `B u + u³`
    Cubic,
    /// `B u`
    Linear,
    /// `u`; analytic test fixture.
    Identity,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::ArctanCubed => "arctan3",
            OperatorKind::Cubic => "cubic",
            OperatorKind::Linear => "linear",
            OperatorKind::Identity => "identity",
        }
    }

    fn nonlinearity(self, u: f64) -> f64 {
        match self {
            OperatorKind::ArctanCubed => u.atan().powi(3),
            OperatorKind::Cubic => u * u * u,
            OperatorKind::Linear | OperatorKind::Identity => 0.0,
        }
    }

    fn nonlinearity_derivative(self, u: f64) -> f64 {
        match self {
            OperatorKind::ArctanCubed => {
                let t = u.atan();
                3.0 * t * t / (1.0 + u * u)
            }
            OperatorKind::Cubic => 3.0 * u * u,
            OperatorKind::Linear | OperatorKind::Identity => 0.0,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arctan3" | "arctan-cubed" => Ok(OperatorKind::ArctanCubed),
            "cubic" => Ok(OperatorKind::Cubic),
            "linear" => Ok(OperatorKind::Linear),
            "identity" => Ok(OperatorKind::Identity),
            other => Err(Error::Validation(format!(
                "unknown operator model '{other}'"
            ))),
        }
    }
}

/// A monotone operator on a fixed grid. The kernel matrix
/// `K_ij = w_j e^{-|x_i - x_j|}` is assembled once at construction.
#[derive(Debug, Clone)]
pub struct OperatorModel {
    kind: OperatorKind,
    grid: Arc<QuadratureGrid>,
    kernel: Option<DenseMatrix>,
}

impl OperatorModel {
    pub fn new(kind: OperatorKind, grid: &Arc<QuadratureGrid>) -> Self {
        let kernel = (kind != OperatorKind::Identity).then(|| kernel_matrix(grid));
        OperatorModel {
            kind,
            grid: Arc::clone(grid),
            kernel,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// The cached kernel matrix; `None` for the identity model.
    pub fn kernel(&self) -> Option<&DenseMatrix> {
        self.kernel.as_ref()
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if u.grid().n() != self.grid.n() {
            return Err(Error::Structural(format!(
                "operator on {} nodes applied to a function on {} nodes",
                self.grid.n(),
                u.grid().n()
            )));
        }
        Ok(())
    }

    /// `(B u)_i = Σ_j w_j e^{-|x_i - x_j|} u_j`.
    pub fn apply_kernel(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check(u)?;
        let values = match &self.kernel {
            Some(k) => k.mul_slice(u.values()),
            None => kernel_matrix(&self.grid).mul_slice(u.values()),
        };
        Ok(GridFunction::from_raw(Arc::clone(&self.grid), values))
    }

    /// Evaluates `F(u)`.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check(u)?;
        let Some(k) = &self.kernel else {
            return Ok(u.clone());
        };
        let mut values = k.mul_slice(u.values());
        for (v, &ui) in values.iter_mut().zip(u.values()) {
            *v += self.kind.nonlinearity(ui);
        }
        Ok(GridFunction::from_raw(Arc::clone(&self.grid), values))
    }

    /// Fréchet derivative `F'(u)` as a dense matrix.
    pub fn jacobian(&self, u: &GridFunction) -> Result<DenseMatrix> {
        self.check(u)?;
        let Some(k) = &self.kernel else {
            return Ok(DenseMatrix::identity(self.grid.n()));
        };
        let mut j = k.clone();
        j.add_diagonal(
            u.values()
                .iter()
                .map(|&ui| self.kind.nonlinearity_derivative(ui)),
        );
        Ok(j)
    }
}

fn kernel_matrix(grid: &QuadratureGrid) -> DenseMatrix {
    let n = grid.n();
    let x = grid.nodes();
    let w = grid.weights();
    let mut k = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = w[j] * (-(x[i] - x[j]).abs()).exp();
        }
    }
    k
}
