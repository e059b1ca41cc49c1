use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use varfem::run::{run_command, Command as RunCommand};

/// Variational finite element experiments on Lagrangian field theories.
#[derive(Parser)]
#[command(name = "varfem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the covariant equations on the spacetime mesh.
    Solve(CommonArgs),
    /// Run a semi-discrete Hamiltonian simulation.
    Simulate(CommonArgs),
    /// Run the variational-structure verification suite.
    Verify(CommonArgs),
    /// Run refinement/convergence studies.
    Converge(CommonArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports and CSV data.
    #[arg(long)]
    out: PathBuf,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Command::Solve(args) => (RunCommand::Solve, args),
        Command::Simulate(args) => (RunCommand::Simulate, args),
        Command::Verify(args) => (RunCommand::Verify, args),
        Command::Converge(args) => (RunCommand::Converge, args),
    };
    match run_command(command, &args.config, &args.out, args.seed) {
        Ok(report) => {
            for check in &report.checks {
                println!(
                    "{}: {} (measured {:.6e}, tolerance {:.6e})",
                    check.name,
                    if check.passed { "pass" } else { "FAIL" },
                    check.measured,
                    check.tolerance
                );
            }
            if report.all_passed() {
                println!("all {} checks passed", report.checks.len());
                ExitCode::SUCCESS
            } else {
                eprintln!("some checks failed; see report.json");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
