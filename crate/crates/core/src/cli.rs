//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or configuration error, 2 no convergence,
//! 3 stagnation of the δ search, 4 shift-and-invert restart injected an
//! error above the tolerance (the solution is still written).

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::config::{CostModel, Method, Shift, SolverConfig};
use crate::error::KrylovError;
use crate::mmio::{self, format_f64, MmError};
use crate::problems::{build_conv_diff, build_random_wellposed, ConvDiffSpec};
use crate::report::SolveReport;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    /// 2D convection–diffusion
    Cd2d,
    /// dense random operator with nonnegative field of values
    Random,
}

/// Evaluate y = exp(-tA) v with restarted Krylov methods.
#[derive(Debug, Clone, Parser)]
#[command(name = "expm-rt", version)]
pub struct RunConfig {
    /// Matrix Market coordinate file with A
    #[arg(long, requires = "vector", conflicts_with = "problem")]
    pub matrix: Option<PathBuf>,
    /// Matrix Market array file with v
    #[arg(long, requires = "matrix")]
    pub vector: Option<PathBuf>,
    /// Built-in problem instead of files
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    /// cd2d: grid points per side including the boundary
    #[arg(long = "N", default_value_t = 102)]
    pub mesh: usize,
    /// cd2d: Peclet number
    #[arg(long, default_value_t = 100.0)]
    pub pe: f64,
    /// random: problem size
    #[arg(long = "n", default_value_t = 100)]
    pub size: usize,
    /// random: generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 30)]
    pub kmax: usize,
    /// rt, art, sai-rt or fixed-step
    #[arg(long, default_value = "rt")]
    pub method: Method,
    /// Shift for sai-rt: a number or 'auto' (t/10)
    #[arg(long, default_value = "auto")]
    pub gamma: Shift,
    #[arg(long, default_value_t = 1)]
    pub substeps: usize,
    #[arg(long = "monitor-points", default_value_t = 6)]
    pub monitor_points: usize,
    #[arg(long = "delta-grid", default_value_t = 200)]
    pub delta_grid: usize,
    /// wall or deterministic
    #[arg(long = "cost-model", default_value = "wall")]
    pub cost_model: CostModel,
    /// Output file for the solution vector
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output CSV with one row per restart cycle
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] MmError),
    #[error("cannot write history: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] KrylovError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(KrylovError::NoConvergence { .. })
            | CliError::Solver(KrylovError::NoConvergenceAtStep { .. }) => 2,
            CliError::Solver(KrylovError::Stagnation { .. }) => 3,
            CliError::Solver(KrylovError::InvalidConfig(_)) => 1,
            CliError::Solver(_) => 1,
            _ => 1,
        }
    }
}

impl RunConfig {
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.t, self.tol, self.kmax)
            .with_method(self.method)
            .with_gamma(self.gamma)
            .with_cost_model(self.cost_model)
            .with_substeps(self.substeps);
        cfg.monitor_points = self.monitor_points;
        cfg.delta_grid = self.delta_grid;
        cfg
    }

    fn load(&self) -> Result<(CsrMatrix, Vec<f64>), CliError> {
        match (&self.matrix, &self.vector, self.problem) {
            (Some(m), Some(v), None) => {
                let a = mmio::read_matrix(m)?;
                let v = mmio::read_vector(v)?;
                if v.len() != a.n() {
                    return Err(CliError::Config(format!(
                        "vector length {} does not match matrix size {}",
                        v.len(),
                        a.n()
                    )));
                }
                Ok((a, v))
            }
            (None, None, Some(ProblemKind::Cd2d)) => {
                let p = build_conv_diff(&ConvDiffSpec {
                    mesh: self.mesh,
                    peclet: self.pe,
                })?;
                Ok((p.matrix, p.v))
            }
            (None, None, Some(ProblemKind::Random)) => Ok(build_random_wellposed(self.size, self.seed)?),
            _ => Err(CliError::Config(
                "give either --matrix and --vector, or --problem".into(),
            )),
        }
    }
}

/// Writes the per-cycle history as CSV.
pub fn write_history<W: std::io::Write>(out: W, report: &SolveReport) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "cycle_index",
        "restart_length",
        "delta",
        "t_remaining",
        "residual_max_monitor",
        "steps_cumulative",
        "cost_units",
        "warning_flag",
    ])?;
    let mut steps = 0;
    for c in &report.cycles {
        steps += c.steps;
        w.write_record([
            c.index.to_string(),
            c.restart_length.to_string(),
            format_f64(c.delta),
            format_f64(c.t_remaining),
            format_f64(c.residual_max_monitor),
            steps.to_string(),
            format_f64(c.cost),
            u8::from(c.accuracy_floor.is_some()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let started = Instant::now();
    let (a, v) = cfg.load()?;
    let solver_cfg = cfg.solver_config();
    let sol = crate::solve(&a, &v, &solver_cfg)?;
    if let Some(path) = &cfg.out {
        mmio::write_vector(path, &sol.y)?;
    }
    if let Some(path) = &cfg.history {
        let file = std::fs::File::create(path).map_err(|source| MmError::Io {
            path: path.display().to_string(),
            source,
        })?;
        write_history(file, &sol.report)?;
    }
    let r = &sol.report;
    println!(
        "method={} steps={} restarts={} residual={:.3e} warnings={} elapsed={:.3}s",
        r.method,
        r.total_steps(),
        r.restarts(),
        r.final_residual(),
        r.warnings.len(),
        started.elapsed().as_secs_f64()
    );
    if let Some(w) = r.warnings.iter().max_by(|a, b| a.floor.total_cmp(&b.floor)) {
        eprintln!(
            "warning: restart residual {:.3e} exceeds tol {:.3e} in {} cycle(s); attainable accuracy is limited",
            w.floor,
            w.tol,
            r.warnings.len()
        );
        return Ok(4);
    }
    Ok(0)
}

/// Runs one configuration and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    }
}
