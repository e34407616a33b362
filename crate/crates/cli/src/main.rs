use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod csv;
mod verify;

use commands::CliError;
use config::RunConfig;

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Steady states, entanglement and threshold temperatures of a two-qubit
/// autonomous thermal machine.
#[derive(Parser, Debug)]
#[command(name = "qtm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path; overrides `[output] path`. Relative paths are placed
    /// under $QTM_OUTPUT_DIR when set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for grid evaluations (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Steady-state residual tolerance; for `verify`, replaces every check
    /// tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Solve one steady state and print the density matrix and its record.
    Steady,
    /// Evaluate steady states over one or two parameter axes.
    Sweep,
    /// Threshold hot temperature for each cold temperature of a grid.
    Threshold,
    /// Maximize steady-state concurrence over the couplings.
    Optimize,
    /// Run the built-in oracle checks.
    Verify,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(t) = cli.tolerance {
        let ok = if cli.command == Command::Verify { t >= 0.0 } else { t > 0.0 };
        if !ok || !t.is_finite() {
            return Err(CliError::Config(format!("invalid --tolerance {t}")));
        }
    }
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if cli.command == Command::Verify {
        return Ok(verify::report(&verify::run(cli.tolerance)));
    }

    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let output = cfg.output_path(cli.output.as_deref());
    let output = output.as_deref();
    match cli.command {
        Command::Steady => commands::steady(&cfg, cli.tolerance, output)?,
        Command::Sweep => commands::sweep(&cfg, cli.tolerance, output)?,
        Command::Threshold => commands::threshold(&cfg, output)?,
        Command::Optimize => commands::optimize(&cfg, output)?,
        Command::Verify => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
