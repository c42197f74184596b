//! Experiment orchestration: exact solutions, noise, sweeps over relative
//! noise levels, and output.

mod config;
mod lemma_suite;
mod output;

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dsm::{
    make_schedule_discrete, run_euler, run_iteration, ContinuousSchedule, RunRecord, StoppingRule,
};
use crate::error::{Error, Result};
use crate::hilbert::{GridFunction, Metric, QuadratureGrid};
use crate::operators::{OperatorKind, OperatorModel};

pub use config::{parse_config_file, ConfigOverrides};
pub use lemma_suite::{emit_lemma_csv, emit_lemma_table, run_lemma_suite, LEMMA_CSV_HEADER};
pub use output::{
    emit_csv, emit_table, format_sig6, parse_csv, render_csv, solution_csv, CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactSolution {
    /// 0 on the closed interval [1/3, 2/3], 1 elsewhere.
    Step,
    /// u ≡ 1.
    ConstOne,
}

impl ExactSolution {
    pub fn value(self, x: f64) -> f64 {
        match self {
            ExactSolution::Step if (1.0 / 3.0..=2.0 / 3.0).contains(&x) => 0.0,
            ExactSolution::Step | ExactSolution::ConstOne => 1.0,
        }
    }

    pub fn sample(self, grid: &Arc<QuadratureGrid>) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.value(x))
    }

    pub fn name(self) -> &'static str {
        match self {
            ExactSolution::Step => "step",
            ExactSolution::ConstOne => "one",
        }
    }
}

impl fmt::Display for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExactSolution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(ExactSolution::Step),
            "one" | "const-one" => Ok(ExactSolution::ConstOne),
            other => Err(Error::Validation(format!(
                "unknown exact solution '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Sine,
}

impl FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "sine" => Ok(NoiseKind::Sine),
            other => Err(Error::Validation(format!("unknown noise model '{other}'"))),
        }
    }
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Sine => "sine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// i.i.d. standard normal node values.
    Gaussian { seed: u64 },
    /// `sin(3πx)`.
    Sine,
}

impl NoiseModel {
    /// Samples the noise direction. Gaussian draws come from a ChaCha20
    /// stream seeded with `seed`, one Box–Muller transform per node in node
    /// order.
    pub fn sample(self, grid: &Arc<QuadratureGrid>) -> GridFunction {
        match self {
            NoiseModel::Sine => GridFunction::from_fn(grid, |x| (3.0 * PI * x).sin()),
            NoiseModel::Gaussian { seed } => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                let values = (0..grid.n())
                    .map(|_| {
                        // u1 in (0, 1] keeps the logarithm finite.
                        let u1 = 1.0 - rng.random::<f64>();
                        let u2 = rng.random::<f64>();
                        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
                    })
                    .collect();
                GridFunction::from_raw(Arc::clone(grid), values)
            }
        }
    }
}

/// Scales `noise` so that `‖f_δ − f‖ = delta_rel·‖f‖` and returns
/// `(f_δ, δ)`.
pub fn calibrate_noise(
    f: &GridFunction,
    noise: &GridFunction,
    delta_rel: f64,
    metric: Metric,
) -> Result<(GridFunction, f64)> {
    f.check_grid(noise)?;
    if !(delta_rel > 0.0) || !delta_rel.is_finite() {
        return Err(Error::Validation(format!(
            "delta_rel must be positive, got {delta_rel}"
        )));
    }
    let noise_norm = metric.norm(noise);
    if noise_norm == 0.0 {
        return Err(Error::Domain("noise function has zero norm".into()));
    }
    let f_norm = metric.norm(f);
    let kappa = delta_rel * f_norm / noise_norm;
    Ok((f.axpy(kappa, noise), delta_rel * f_norm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Regularized Newton iteration, `h = 1`.
    Iterate,
    /// Explicit Euler on the continuous problem with step `h`.
    Euler,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterate" => Ok(Mode::Iterate),
            "euler" => Ok(Mode::Euler),
            other => Err(Error::Validation(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// arctan³ model, step solution, gaussian noise.
    Exp1,
    /// Cubic model, step solution, sine noise.
    Exp2,
    /// arctan³ model, u ≡ 1.
    Exp1Const,
    /// Cubic model, u ≡ 1.
    Exp2Const,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Preset::Exp1),
            "exp2" => Ok(Preset::Exp2),
            "exp1-const" => Ok(Preset::Exp1Const),
            "exp2-const" => Ok(Preset::Exp2Const),
            other => Err(Error::Validation(format!("unknown preset '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: OperatorKind,
    pub exact: ExactSolution,
    pub n_points: usize,
    pub delta_rel: Vec<f64>,
    pub c0: f64,
    pub stop: StoppingRule,
    /// Exponent `p` of the schedule `a_n = c0·δ^p/(n + shift)`.
    pub p: f64,
    pub shift: u32,
    pub noise: NoiseKind,
    pub mode: Mode,
    pub h: f64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub seeds: Vec<u64>,
    /// When false, rows carry `wall_time_s = 0` so output is byte-stable.
    pub record_timing: bool,
}

const TABLE_DELTAS: [f64; 5] = [0.02, 0.01, 0.005, 0.003, 0.001];
const CONST_DELTAS: [f64; 6] = [0.05, 0.03, 0.02, 0.01, 0.003, 0.001];

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = ExperimentConfig {
            model: OperatorKind::ArctanCubed,
            exact: ExactSolution::Step,
            n_points: 100,
            delta_rel: TABLE_DELTAS.to_vec(),
            c0: 7.0,
            stop: StoppingRule {
                c: 1.01,
                gamma: 0.99,
                metric: Metric::Euclidean,
            },
            p: 0.99,
            shift: 1,
            noise: NoiseKind::Gaussian,
            mode: Mode::Iterate,
            h: 1.0,
            max_iter: 500,
            out: None,
            seeds: vec![0],
            record_timing: true,
        };
        match preset {
            Preset::Exp1 => base,
            Preset::Exp2 => ExperimentConfig {
                model: OperatorKind::Cubic,
                c0: 2.0,
                p: 0.9,
                shift: 6,
                noise: NoiseKind::Sine,
                ..base
            },
            Preset::Exp1Const => ExperimentConfig {
                exact: ExactSolution::ConstOne,
                n_points: 50,
                delta_rel: CONST_DELTAS.to_vec(),
                c0: 4.0,
                noise: NoiseKind::Sine,
                ..base
            },
            Preset::Exp2Const => ExperimentConfig {
                model: OperatorKind::Cubic,
                exact: ExactSolution::ConstOne,
                n_points: 30,
                delta_rel: CONST_DELTAS.to_vec(),
                c0: 1.0,
                p: 0.9,
                shift: 6,
                noise: NoiseKind::Sine,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::Validation(format!(
                "n_points must be at least 2, got {}",
                self.n_points
            )));
        }
        if let Some(d) = self
            .delta_rel
            .iter()
            .find(|d| !(**d > 0.0) || !d.is_finite())
        {
            return Err(Error::Validation(format!(
                "delta_rel values must be positive, got {d}"
            )));
        }
        self.stop.validate()?;
        // Probe the schedule constraints with a representative δ.
        make_schedule_discrete(self.c0, 1.0, self.p, self.shift)?;
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Validation(format!(
                "h must be positive, got {}",
                self.h
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Validation("at least one seed is required".into()));
        }
        Ok(())
    }

    fn noise_model(&self, seed: u64) -> NoiseModel {
        match self.noise {
            NoiseKind::Gaussian => NoiseModel::Gaussian { seed },
            NoiseKind::Sine => NoiseModel::Sine,
        }
    }
}

/// One line of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub delta_rel: f64,
    pub delta_abs: f64,
    pub n_iterations: usize,
    pub rel_error: f64,
    pub c0: f64,
    pub n_points: usize,
    pub seed: u64,
    pub model: String,
    pub exact: String,
    pub stopped: bool,
    pub wall_time_s: f64,
}

/// A row together with the run that produced it.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub row: ResultRow,
    pub record: RunRecord,
    /// The discrepancy threshold `C·δ^γ` the run was stopped against.
    pub threshold: f64,
    pub f_delta: GridFunction,
    pub exact: GridFunction,
}

struct Problem {
    model: OperatorModel,
    exact: GridFunction,
    f: GridFunction,
}

impl Problem {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let grid = QuadratureGrid::new(config.n_points)?;
        let model = OperatorModel::new(config.model, &grid);
        let exact = config.exact.sample(&grid);
        let f = model.apply(&exact)?;
        Ok(Problem { model, exact, f })
    }

    fn run(&self, config: &ExperimentConfig, delta_rel: f64, seed: u64) -> Result<ExperimentRun> {
        let started = Instant::now();
        let noise = config.noise_model(seed).sample(self.model.grid());
        let metric = config.stop.metric;
        let (f_delta, delta) = calibrate_noise(&self.f, &noise, delta_rel, metric)?;
        let schedule = make_schedule_discrete(config.c0, delta, config.p, config.shift)?;
        let record = match config.mode {
            Mode::Iterate => run_iteration(
                &self.model,
                &f_delta,
                delta,
                &schedule,
                &config.stop,
                None,
                config.max_iter,
            )?,
            Mode::Euler => {
                let cont = ContinuousSchedule::matching(&schedule)?;
                run_euler(
                    &self.model,
                    &f_delta,
                    delta,
                    &cont,
                    &config.stop,
                    None,
                    config.h,
                    config.max_iter,
                )?
            }
        };
        let rel_error = metric.rel_error(&record.final_iterate, &self.exact)?;
        let wall_time_s = if config.record_timing {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let row = ResultRow {
            delta_rel,
            delta_abs: delta,
            n_iterations: record.n_stop,
            rel_error,
            c0: config.c0,
            n_points: config.n_points,
            seed,
            model: config.model.name().to_string(),
            exact: config.exact.name().to_string(),
            stopped: record.stopped_by_discrepancy,
            wall_time_s,
        };
        Ok(ExperimentRun {
            row,
            threshold: config.stop.threshold(delta),
            record,
            f_delta,
            exact: self.exact.clone(),
        })
    }
}

fn sweep_cells(config: &ExperimentConfig) -> Vec<(f64, u64)> {
    let mut deltas = config.delta_rel.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    deltas
        .iter()
        .flat_map(|&d| seeds.iter().map(move |&s| (d, s)))
        .collect()
}

/// Runs every `(delta_rel, seed)` cell, ordered by descending `delta_rel`
/// then ascending seed. Divergent runs are recorded, not raised.
pub fn run_experiment_detailed(config: &ExperimentConfig) -> Result<Vec<ExperimentRun>> {
    config.validate()?;
    let cells = sweep_cells(config);
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let problem = Problem::new(config)?;
    let problem = &problem;
    // Cells are independent; run them on scoped threads and keep the order.
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(cells.len());
    let chunk = cells.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(d, s)| problem.run(config, d, s))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut runs = Vec::with_capacity(cells.len());
        for h in handles {
            runs.extend(h.join().expect("experiment worker panicked")?);
        }
        Ok(runs)
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_detailed(config)?
        .into_iter()
        .map(|r| r.row)
        .collect())
}

/// Node-wise exact and reconstructed solutions for one run.
#[derive(Debug, Clone)]
pub struct SolutionDump {
    pub x: Vec<f64>,
    pub exact: Vec<f64>,
    pub dsm: Vec<f64>,
    pub row: ResultRow,
}

pub fn run_solution_dump(
    config: &ExperimentConfig,
    delta_rel: f64,
    seed: u64,
) -> Result<SolutionDump> {
    config.validate()?;
    let problem = Problem::new(config)?;
    let run = problem.run(config, delta_rel, seed)?;
    Ok(SolutionDump {
        x: problem.model.grid().nodes().to_vec(),
        exact: run.exact.values().to_vec(),
        dsm: run.record.final_iterate.values().to_vec(),
        row: run.row,
    })
}

/// Median of a slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::norm;

    #[test]
    fn step_is_zero_on_closed_middle_third() {
        let g = QuadratureGrid::new(100).unwrap();
        let u = ExactSolution::Step.sample(&g);
        for (&x, &v) in g.nodes().iter().zip(u.values()) {
            let inside = (1.0 / 3.0..=2.0 / 3.0).contains(&x);
            assert_eq!(v, if inside { 0.0 } else { 1.0 });
        }
        // x = 33/99 and 66/99 are exactly the jump points.
        assert_eq!(u.values()[33], 0.0);
        assert_eq!(u.values()[66], 0.0);
        assert_eq!(u.values()[32], 1.0);
        assert_eq!(u.values()[67], 1.0);
    }

    #[test]
    fn calibration_identities() {
        let g = QuadratureGrid::new(100).unwrap();
        let f = GridFunction::from_fn(&g, |x| 1.0 + x * x);
        let (fd, delta) = calibrate_noise(&f, &f, 1.0, Metric::Weighted).unwrap();
        assert!((&fd - &(2.0 * &f)).norm() < 1e-14);
        assert!((delta - norm(&f)).abs() < 1e-14);

        let sine = NoiseModel::Sine.sample(&g);
        for metric in [Metric::Weighted, Metric::Euclidean] {
            let (fd, delta) = calibrate_noise(&f, &sine, 0.01, metric).unwrap();
            assert!((delta / metric.norm(&f) - 0.01).abs() < 1e-12 * 0.01);
            let actual = metric.norm(&(&fd - &f));
            assert!((actual - delta).abs() <= 1e-12 * delta);
        }
        assert!(calibrate_noise(&f, &sine, 0.0, Metric::Weighted).is_err());
        assert!(matches!(
            calibrate_noise(&f, &GridFunction::zeros(&g), 0.1, Metric::Weighted),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gaussian_noise_is_reproducible() {
        let g = QuadratureGrid::new(100).unwrap();
        let a = NoiseModel::Gaussian { seed: 42 }.sample(&g);
        let b = NoiseModel::Gaussian { seed: 42 }.sample(&g);
        let c = NoiseModel::Gaussian { seed: 43 }.sample(&g);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn gaussian_noise_moments() {
        let g = QuadratureGrid::new(20_000).unwrap();
        let z = NoiseModel::Gaussian { seed: 7 }.sample(&g);
        let n = z.len() as f64;
        let mean = z.values().iter().sum::<f64>() / n;
        let var = z.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.03, "{mean}");
        assert!((var - 1.0).abs() < 0.04, "{var}");
    }

    #[test]
    fn empty_sweep() {
        let mut cfg = ExperimentConfig::preset(Preset::Exp2);
        cfg.delta_rel.clear();
        assert!(run_experiment(&cfg).unwrap().is_empty());
    }

    #[test]
    fn cells_are_ordered() {
        let mut cfg = ExperimentConfig::preset(Preset::Exp1);
        cfg.delta_rel = vec![0.001, 0.02, 0.005];
        cfg.seeds = vec![3, 1];
        let cells = sweep_cells(&cfg);
        assert_eq!(
            cells,
            vec![
                (0.02, 1),
                (0.02, 3),
                (0.005, 1),
                (0.005, 3),
                (0.001, 1),
                (0.001, 3)
            ]
        );
    }

    #[test]
    fn invalid_configs() {
        let base = ExperimentConfig::preset(Preset::Exp1);
        let cases = [
            ExperimentConfig {
                n_points: 1,
                ..base.clone()
            },
            ExperimentConfig {
                c0: 0.0,
                ..base.clone()
            },
            ExperimentConfig {
                shift: 0,
                ..base.clone()
            },
            ExperimentConfig {
                h: -1.0,
                ..base.clone()
            },
            ExperimentConfig {
                delta_rel: vec![0.01, -0.1],
                ..base.clone()
            },
            ExperimentConfig {
                seeds: vec![],
                ..base.clone()
            },
        ];
        for cfg in cases {
            assert!(
                matches!(cfg.validate(), Err(Error::Validation(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
