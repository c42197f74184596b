//! Python bindings for `dsm_core`.
//!
//! Grid functions cross the boundary as lists of node values; the grid is
//! implied by the model they are used with.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dsm_core::harness::{
    self, ConfigOverrides, ExperimentConfig, Mode, NoiseKind, NoiseModel, Preset,
};
use dsm_core::lemmas::LemmaCheckReport;
use dsm_core::{
    dsm, regsolve, Error, GridFunction, Metric, NewtonOptions, OperatorKind, OperatorModel,
    QuadratureGrid, StoppingRule,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Validation(_) | Error::Structural(_) | Error::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::SingularPivot { .. } | Error::NotConverged { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// Uniform grid on [0, 1] with trapezoidal weights.
#[pyclass(name = "Grid", frozen)]
struct PyGrid {
    inner: Arc<QuadratureGrid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: QuadratureGrid::new(n).map_err(to_py)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    /// Weighted L² inner product of two node-value lists.
    fn inner(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        let u = GridFunction::new(Arc::clone(&self.inner), u).map_err(to_py)?;
        let v = GridFunction::new(Arc::clone(&self.inner), v).map_err(to_py)?;
        dsm_core::inner(&u, &v).map_err(to_py)
    }

    fn norm(&self, u: Vec<f64>) -> PyResult<f64> {
        let u = GridFunction::new(Arc::clone(&self.inner), u).map_err(to_py)?;
        Ok(dsm_core::norm(&u))
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={})", self.inner.n())
    }
}

/// `F(u) = Bu + g(u)` on an `n`-point grid; `kind` is one of arctan3,
/// cubic, linear, identity.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: OperatorModel,
}

impl PyModel {
    fn gf(&self, values: Vec<f64>) -> PyResult<GridFunction> {
        GridFunction::new(Arc::clone(self.inner.grid()), values).map_err(to_py)
    }
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(kind: &str, n: usize) -> PyResult<Self> {
        let kind: OperatorKind = parse(kind)?;
        let grid = QuadratureGrid::new(n).map_err(to_py)?;
        Ok(PyModel {
            inner: OperatorModel::new(kind, &grid),
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid {
            inner: Arc::clone(self.inner.grid()),
        }
    }

    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.apply(&self.gf(u)?).map_err(to_py)?.into_values())
    }

    /// Dense Jacobian as a list of rows.
    fn jacobian(&self, u: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.jacobian(&self.gf(u)?).map_err(to_py)?.rows())
    }

    /// Solves `F(V) + aV = f` by damped Newton. Returns a dict with
    /// solution, residual_norm, iterations and converged.
    #[pyo3(signature = (f, a, tol = 1e-12, max_iter = 100))]
    fn solve_regularized<'py>(
        &self,
        py: Python<'py>,
        f: Vec<f64>,
        a: f64,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let opts = NewtonOptions {
            tol,
            max_iter,
            ..Default::default()
        };
        let rep =
            regsolve::solve_regularized(&self.inner, &self.gf(f)?, a, &opts).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("solution", rep.solution.into_values())?;
        d.set_item("residual_norm", rep.residual_norm)?;
        d.set_item("iterations", rep.iterations)?;
        d.set_item("converged", rep.converged)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model('{}', n={})",
            self.inner.name(),
            self.inner.grid().n()
        )
    }
}

/// `a_n = c0·δ^p/(n + shift)`.
#[pyclass(name = "DiscreteSchedule", frozen)]
struct PyDiscreteSchedule {
    inner: dsm::DiscreteSchedule,
}

#[pymethods]
impl PyDiscreteSchedule {
    #[new]
    #[pyo3(signature = (c0, delta, p, shift = 1))]
    fn new(c0: f64, delta: f64, p: f64, shift: u32) -> PyResult<Self> {
        Ok(PyDiscreteSchedule {
            inner: dsm::make_schedule_discrete(c0, delta, p, shift).map_err(to_py)?,
        })
    }

    fn value(&self, n: usize) -> f64 {
        self.inner.value(n)
    }

    /// The continuous schedule `c0·δ^p/(shift + t)`.
    fn matching(&self) -> PyResult<PyContinuousSchedule> {
        Ok(PyContinuousSchedule {
            inner: dsm::ContinuousSchedule::matching(&self.inner).map_err(to_py)?,
        })
    }
}

/// `a(t) = d/(c + t)^b`. With `strict`, also requires `c >= max(2b, 1)`.
#[pyclass(name = "ContinuousSchedule", frozen)]
struct PyContinuousSchedule {
    inner: dsm::ContinuousSchedule,
}

#[pymethods]
impl PyContinuousSchedule {
    #[new]
    #[pyo3(signature = (d, c, b, strict = false))]
    fn new(d: f64, c: f64, b: f64, strict: bool) -> PyResult<Self> {
        let inner = if strict {
            dsm::make_schedule_continuous(d, c, b)
        } else {
            dsm::ContinuousSchedule::new(d, c, b)
        };
        Ok(PyContinuousSchedule {
            inner: inner.map_err(to_py)?,
        })
    }

    fn value(&self, t: f64) -> f64 {
        self.inner.value(t)
    }

    fn derivative_abs(&self, t: f64) -> f64 {
        self.inner.derivative_abs(t)
    }
}

#[pyclass(name = "RunRecord", frozen, get_all)]
struct PyRunRecord {
    final_iterate: Vec<f64>,
    n_stop: usize,
    residuals: Vec<f64>,
    a_values: Vec<f64>,
    stopped_by_discrepancy: bool,
    wall_time: f64,
}

#[pymethods]
impl PyRunRecord {
    fn __repr__(&self) -> String {
        format!(
            "RunRecord(n_stop={}, stopped_by_discrepancy={})",
            self.n_stop, self.stopped_by_discrepancy
        )
    }
}

impl From<dsm::RunRecord> for PyRunRecord {
    fn from(r: dsm::RunRecord) -> Self {
        PyRunRecord {
            final_iterate: r.final_iterate.into_values(),
            n_stop: r.n_stop,
            residuals: r.residuals,
            a_values: r.a_values,
            stopped_by_discrepancy: r.stopped_by_discrepancy,
            wall_time: r.wall_time,
        }
    }
}

fn rule(c: f64, gamma: f64, metric: &str) -> PyResult<StoppingRule> {
    StoppingRule::new(c, gamma, parse::<Metric>(metric)?).map_err(to_py)
}

/// Regularized Newton iteration stopped by the discrepancy principle.
#[pyfunction]
#[pyo3(signature = (model, f_delta, delta, schedule, c = 1.01, gamma = 0.99, metric = "euclidean", max_iter = 500))]
#[allow(clippy::too_many_arguments)]
fn run_iteration(
    model: &PyModel,
    f_delta: Vec<f64>,
    delta: f64,
    schedule: &PyDiscreteSchedule,
    c: f64,
    gamma: f64,
    metric: &str,
    max_iter: usize,
) -> PyResult<PyRunRecord> {
    let rule = rule(c, gamma, metric)?;
    let f = model.gf(f_delta)?;
    dsm::run_iteration(
        &model.inner,
        &f,
        delta,
        &schedule.inner,
        &rule,
        None,
        max_iter,
    )
    .map(Into::into)
    .map_err(to_py)
}

/// Explicit Euler integration of the DSM flow with step `h`.
#[pyfunction]
#[pyo3(signature = (model, f_delta, delta, schedule, h = 1.0, c = 1.01, gamma = 0.99, metric = "euclidean", max_steps = 500))]
#[allow(clippy::too_many_arguments)]
fn run_euler(
    model: &PyModel,
    f_delta: Vec<f64>,
    delta: f64,
    schedule: &PyContinuousSchedule,
    h: f64,
    c: f64,
    gamma: f64,
    metric: &str,
    max_steps: usize,
) -> PyResult<PyRunRecord> {
    let rule = rule(c, gamma, metric)?;
    let f = model.gf(f_delta)?;
    dsm::run_euler(
        &model.inner,
        &f,
        delta,
        &schedule.inner,
        &rule,
        None,
        h,
        max_steps,
    )
    .map(Into::into)
    .map_err(to_py)
}

/// Returns `(f_delta, delta)` with `‖f_delta − f‖ = delta_rel·‖f‖`.
#[pyfunction]
#[pyo3(signature = (grid, f, noise, delta_rel, metric = "euclidean"))]
fn calibrate_noise(
    grid: &PyGrid,
    f: Vec<f64>,
    noise: Vec<f64>,
    delta_rel: f64,
    metric: &str,
) -> PyResult<(Vec<f64>, f64)> {
    let f = GridFunction::new(Arc::clone(&grid.inner), f).map_err(to_py)?;
    let noise = GridFunction::new(Arc::clone(&grid.inner), noise).map_err(to_py)?;
    let (fd, delta) =
        harness::calibrate_noise(&f, &noise, delta_rel, parse(metric)?).map_err(to_py)?;
    Ok((fd.into_values(), delta))
}

/// Noise direction on `grid`: `"sine"` or `"gaussian"` (seeded).
#[pyfunction]
#[pyo3(signature = (grid, kind, seed = 0))]
fn sample_noise(grid: &PyGrid, kind: &str, seed: u64) -> PyResult<Vec<f64>> {
    let model = match parse::<NoiseKind>(kind)? {
        NoiseKind::Sine => NoiseModel::Sine,
        NoiseKind::Gaussian => NoiseModel::Gaussian { seed },
    };
    Ok(model.sample(&grid.inner).into_values())
}

fn experiment_config(
    preset: &str,
    delta_rel: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
    c0: Option<f64>,
    n_points: Option<usize>,
    mode: Option<&str>,
    h: Option<f64>,
) -> PyResult<ExperimentConfig> {
    let overrides = ConfigOverrides {
        preset: Some(parse::<Preset>(preset)?),
        delta_rel,
        seeds,
        c0,
        n_points,
        mode: mode.map(parse::<Mode>).transpose()?,
        h,
        ..Default::default()
    };
    overrides.resolve().map_err(to_py)
}

/// Runs a preset sweep. Returns one dict per row, keyed like the CSV
/// columns.
#[pyfunction]
#[pyo3(signature = (preset, delta_rel = None, seeds = None, c0 = None, n_points = None, mode = None, h = None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    preset: &str,
    delta_rel: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
    c0: Option<f64>,
    n_points: Option<usize>,
    mode: Option<&str>,
    h: Option<f64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = experiment_config(preset, delta_rel, seeds, c0, n_points, mode, h)?;
    let rows = py
        .detach(|| harness::run_experiment(&config))
        .map_err(to_py)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("delta_rel", r.delta_rel)?;
            d.set_item("delta_abs", r.delta_abs)?;
            d.set_item("n_iterations", r.n_iterations)?;
            d.set_item("rel_error", r.rel_error)?;
            d.set_item("c0", r.c0)?;
            d.set_item("n_points", r.n_points)?;
            d.set_item("seed", r.seed)?;
            d.set_item("model", r.model)?;
            d.set_item("exact", r.exact)?;
            d.set_item("stopped", r.stopped)?;
            d.set_item("wall_time_s", r.wall_time_s)?;
            Ok(d)
        })
        .collect()
}

/// Same sweep as [`run_experiment`], rendered as the results CSV.
#[pyfunction]
#[pyo3(signature = (preset, delta_rel = None, seeds = None, c0 = None, n_points = None))]
fn experiment_csv(
    py: Python<'_>,
    preset: &str,
    delta_rel: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
    c0: Option<f64>,
    n_points: Option<usize>,
) -> PyResult<String> {
    let config = experiment_config(preset, delta_rel, seeds, c0, n_points, None, None)?;
    let rows = py
        .detach(|| harness::run_experiment(&config))
        .map_err(to_py)?;
    Ok(harness::render_csv(&rows))
}

fn report_dict<'py>(py: Python<'py>, r: &LemmaCheckReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &r.name)?;
    d.set_item("passed", r.passed)?;
    d.set_item("worst_margin", r.worst_margin)?;
    d.set_item("samples", r.samples)?;
    Ok(d)
}

/// Runs the lemma checks for one model (default: all three).
#[pyfunction]
#[pyo3(signature = (model = None))]
fn verify_lemmas<'py>(py: Python<'py>, model: Option<&str>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kinds = match model {
        Some(m) => vec![parse::<OperatorKind>(m)?],
        None => vec![
            OperatorKind::ArctanCubed,
            OperatorKind::Cubic,
            OperatorKind::Identity,
        ],
    };
    let mut reports = Vec::new();
    for k in kinds {
        reports.extend(py.detach(|| harness::run_lemma_suite(k)).map_err(to_py)?);
    }
    reports.iter().map(|r| report_dict(py, r)).collect()
}

#[pymodule]
fn dsm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyDiscreteSchedule>()?;
    m.add_class::<PyContinuousSchedule>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_function(wrap_pyfunction!(run_iteration, m)?)?;
    m.add_function(wrap_pyfunction!(run_euler, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_noise, m)?)?;
    m.add_function(wrap_pyfunction!(sample_noise, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_csv, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemmas, m)?)?;
    Ok(())
}
