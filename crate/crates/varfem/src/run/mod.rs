//! Configuration-driven experiment runner behind the command-line interface.
//!
//! Commands load a JSON [`ExperimentConfig`](config::ExperimentConfig), run
//! the requested experiment deterministically (random probes are drawn from a
//! seeded generator, default seed 0), and write a `report.json` plus CSV
//! outputs atomically into the output directory. Identical configurations
//! produce byte-identical reports.

mod commands;
mod config;
mod report;

pub use commands::{cmd_converge, cmd_simulate_canonical, cmd_solve_covariant, cmd_verify};
pub use config::{
    BoundaryConfig, BoundaryKind, CanonicalConfig, CheckName, ExperimentConfig, Family,
    MeshConfig, NonlinearityConfig, NonlinearityKind, ProblemConfig, RegionSpec, SolverConfig,
    StepperConfig, StudyConfig, StudyTarget, VerifyConfig,
};
pub use report::{sig17, write_atomic, write_csv, CheckResult, RunReport, SolveSummary, Table};

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Exit code conventions: 0 all checks pass, 1 configuration error,
/// 2 check failure, 3 solver failure.
impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Solver(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Simulate,
    Verify,
    Converge,
}

/// Load a config, run one command, and write the report into `out_dir`.
///
/// Returns the report; callers decide the process exit code from
/// [`RunReport::all_passed`].
pub fn run_command(
    command: Command,
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<RunReport, RunError> {
    let config = ExperimentConfig::from_file(config_path).map_err(RunError::Config)?;
    let seed = seed_override.unwrap_or(config.seed);
    std::fs::create_dir_all(out_dir)?;
    let mut report = match command {
        Command::Solve => cmd_solve_covariant(&config, out_dir, seed)?,
        Command::Simulate => cmd_simulate_canonical(&config, out_dir, seed)?,
        Command::Verify => cmd_verify(&config, out_dir, seed)?,
        Command::Converge => cmd_converge(&config, out_dir, seed)?,
    };
    report.write_json(out_dir)?;
    Ok(report)
}
