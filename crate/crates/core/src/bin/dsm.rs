use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dsm_core::harness::{
    emit_lemma_csv, emit_lemma_table, emit_table, parse_config_file, render_csv, run_experiment,
    run_lemma_suite, run_solution_dump, solution_csv, ConfigOverrides, Mode, NoiseKind, Preset,
};
use dsm_core::{Error, OperatorKind};

#[derive(Parser)]
#[command(
    name = "dsm",
    version,
    about = "Regularized DSM solver for monotone integral equations"
)]
struct Cli {
    /// key = value file read before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep relative noise levels and seeds; print a table or write CSV.
    Run(RunArgs),
    /// Write x, u_exact, u_dsm for one run.
    DumpSolution {
        #[arg(long, value_parser = parse_arg::<Preset>)]
        preset: Option<Preset>,
        #[arg(long)]
        delta_rel: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the lemma checks; exit 0 iff all pass.
    VerifyLemmas {
        #[arg(long, value_parser = parse_arg::<OperatorKind>)]
        model: Option<OperatorKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_arg::<Preset>)]
    preset: Option<Preset>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    c0: Option<f64>,
    /// Comma-separated, e.g. 0.02,0.01.
    #[arg(long, value_delimiter = ',')]
    delta_rel: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_parser = parse_arg::<Mode>)]
    mode: Option<Mode>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    stop_c: Option<f64>,
    #[arg(long, value_parser = parse_arg::<NoiseKind>)]
    noise: Option<NoiseKind>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_arg<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr<Err = Error>,
{
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        Error::Validation(_) | Error::Structural(_) | Error::Domain(_) => 2,
        Error::SingularPivot { .. } | Error::NotConverged { .. } => 1,
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigOverrides, Error> {
    match path {
        None => Ok(ConfigOverrides::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config_file(&text)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Run(a) => {
            let flags = ConfigOverrides {
                preset: a.preset,
                n_points: a.n_points,
                c0: a.c0,
                delta_rel: a.delta_rel,
                seeds: a.seeds,
                mode: a.mode,
                h: a.h,
                gamma: a.gamma,
                stop_c: a.stop_c,
                noise: a.noise,
                max_iter: a.max_iter,
                out: a.out,
                ..Default::default()
            };
            let config = file.merge(flags).resolve()?;
            let rows = run_experiment(&config)?;
            match &config.out {
                Some(path) => write_file(path, &render_csv(&rows))?,
                None => print!("{}", emit_table(&rows)),
            }
            let diverged = rows.iter().filter(|r| !r.stopped).count();
            if diverged > 0 {
                eprintln!("{diverged} run(s) did not meet the discrepancy criterion");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpSolution {
            preset,
            delta_rel,
            seed,
            out,
        } => {
            let flags = ConfigOverrides {
                preset,
                ..Default::default()
            };
            let config = file.merge(flags).resolve()?;
            let dump = run_solution_dump(&config, delta_rel, seed)?;
            write_file(&out, &solution_csv(&dump))?;
            Ok(if dump.row.stopped {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::VerifyLemmas { model, out } => {
            let kinds = match model {
                Some(k) => vec![k],
                None => vec![
                    OperatorKind::ArctanCubed,
                    OperatorKind::Cubic,
                    OperatorKind::Identity,
                ],
            };
            let mut reports = Vec::new();
            for k in kinds {
                reports.extend(run_lemma_suite(k)?);
            }
            match out {
                Some(path) => write_file(&path, &emit_lemma_csv(&reports))?,
                None => print!("{}", emit_lemma_table(&reports)),
            }
            let all = reports.iter().all(|r| r.passed);
            Ok(if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => {
            let _ = std::io::stdout().flush();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
