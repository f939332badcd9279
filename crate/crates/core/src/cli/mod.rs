//! The `fronts` command-line tool.

pub mod artifacts;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::grid::GridError;
use crate::lattice::LatticeError;
use crate::macroscopic::MacroError;
use crate::phases::PhaseError;
use crate::potential::PotentialError;
use crate::solver::SolverError;

pub use config::RunConfig;

/// Exit code for a completed run whose check or verification failed.
pub const EXIT_FAILED: u8 = 1;
/// Exit code for configuration, parse and I/O errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code for numerical or admissibility errors raised by the library.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Macro(#[from] MacroError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Potential(_) => "potential",
            CliError::Macro(_) => "macroscopic",
            CliError::Solver(_) => "solver",
            CliError::Lattice(_) => "lattice",
            CliError::Phase(_) => "phases",
            CliError::Grid(_) => "grid",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::Io { .. }
            | CliError::Csv { .. }
            | CliError::Potential(_) => EXIT_CONFIG,
            CliError::Solver(SolverError::ConfigInvalid(_))
            | CliError::Solver(SolverError::Grid(_)) => EXIT_CONFIG,
            CliError::Lattice(LatticeError::InvalidStep(_))
            | CliError::Lattice(LatticeError::InvalidSetup(_)) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut obj = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Macro(m) = self {
            obj["reason"] = m.reason().into();
        }
        obj.to_string()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fronts",
    version,
    about = "Action-minimizing heteroclinic fronts in FPU chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the admissibility conditions of the (normalized) potential.
    CheckPotential(Common),
    /// Compute the front data and the normalization map.
    Normalize(Common),
    /// Minimize the action and write the profile artifacts.
    Solve(SolveArgs),
    /// Run a lattice simulation started on a stored profile.
    Verify(ProfileArgs),
    /// Phase separation and layer costs of a stored profile.
    Diagnose(ProfileArgs),
    /// Solve over a list of β values in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Run the lattice verification after a converged solve.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: Common,
    /// profile.csv written by `solve`.
    #[arg(short, long)]
    pub profile: PathBuf,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    /// Also write the sampled chain state to trajectory.csv.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    /// Comma-separated β values; overrides `[sweep] betas`.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl SolveArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(v) = self.half_width {
            cfg.grid.half_width = v;
        }
        if let Some(v) = self.cells {
            cfg.grid.cells = v;
        }
        if let Some(v) = self.lambda0 {
            cfg.solver.lambda0 = v;
        }
        if let Some(v) = self.grad_tol {
            cfg.solver.grad_tol = v;
        }
        if let Some(v) = self.max_iters {
            cfg.solver.max_iters = v;
        }
        if self.verify {
            cfg.verify = true;
        }
    }
}

/// Runs a parsed command; returns the process exit code on completion.
pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::CheckPotential(a) => commands::check_potential(&RunConfig::load(&a.config)?),
        Command::Normalize(a) => commands::normalize(&RunConfig::load(&a.config)?),
        Command::Solve(a) => {
            let mut cfg = RunConfig::load(&a.common.config)?;
            a.apply(&mut cfg);
            commands::solve(&cfg)
        }
        Command::Verify(a) => {
            let mut cfg = RunConfig::load(&a.common.config)?;
            if let Some(d) = &a.output_dir {
                cfg.output_dir = d.clone();
            }
            commands::verify(&cfg, &a.profile, a.trajectory)
        }
        Command::Diagnose(a) => commands::diagnose(&RunConfig::load(&a.common.config)?, &a.profile),
        Command::Sweep(a) => {
            let mut cfg = RunConfig::load(&a.common.config)?;
            if let Some(d) = &a.output_dir {
                cfg.output_dir = d.clone();
            }
            if let Some(b) = &a.betas {
                cfg.sweep.betas = b.clone();
            }
            if let Some(w) = a.workers {
                cfg.sweep.workers = w;
            }
            commands::sweep(&cfg)
        }
    }
}
