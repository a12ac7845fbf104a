//! Command-line surface of the workbench.
//!
//! Exit codes: 0 when every check of the invoked command passes, 1 on
//! numerical failure (non-convergence or a failed check), 2 on invalid
//! configuration or I/O problems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use latdress_cli::config::ExperimentConfig;
use latdress_cli::{report, runner, CliError};

#[derive(Parser)]
#[command(
    name = "latdress",
    about = "Lattice workbench for dressing fields and gauge fixing"
)]
struct Cli {
    /// Experiment configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the solver tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the composer identity suite over random configurations.
    CheckComposers,
    /// Run the action invariance and gradient suite.
    CheckAction,
    /// Solve the configured gauge fixing for its dressing field.
    Gaugefix {
        /// Read the input bundle from a field archive instead of seeding one.
        #[arg(long)]
        load_input: Option<PathBuf>,
        /// Write the input bundle to a field archive.
        #[arg(long)]
        save_input: Option<PathBuf>,
    },
    /// Compare the dressing of a transformed bundle with the transformed dressing.
    CheckEquivariance,
    /// Solve across a list of xi values and tabulate distances to the unitary limit.
    XiSweep {
        /// Read the input bundle from a field archive instead of seeding one.
        #[arg(long)]
        load_input: Option<PathBuf>,
    },
    /// Log-determinants of the dressing derivative and the shift check.
    FpDet,
    /// Verify the polar change-of-variables Jacobians.
    Jacobian,
    /// Profile how far a local perturbation propagates into the dressing.
    Locality,
    /// Deformation responses and dressed-field variations.
    Variations,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(CliError::Config("tol must be positive".into()));
        }
        cfg.tol = tol;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<report::Summary, CliError> {
    let cfg = load_config(cli)?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cli.out.display())))?;
    match &cli.command {
        Command::CheckComposers => runner::check_composers(&cfg, &cli.out),
        Command::CheckAction => runner::check_action(&cfg, &cli.out),
        Command::Gaugefix {
            load_input,
            save_input,
        } => runner::gaugefix(&cfg, &cli.out, load_input.as_ref(), save_input.as_ref()),
        Command::CheckEquivariance => runner::check_equivariance(&cfg, &cli.out),
        Command::XiSweep { load_input } => {
            runner::run_xi_sweep(&cfg, &cli.out, load_input.as_ref())
        }
        Command::FpDet => runner::fp_det(&cfg, &cli.out),
        Command::Jacobian => runner::jacobian(&cfg, &cli.out),
        Command::Locality => runner::locality(&cfg, &cli.out),
        Command::Variations => runner::variations(&cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            summary.print();
            if summary.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
    }
}
