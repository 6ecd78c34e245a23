//! dirac1d: experiment runner for the one-dimensional nonlinear Dirac
//! laboratory.
//!
//! ```text
//! dirac1d <mode> --config path [--output dir] [--threads n]
//! ```
//!
//! Exit codes: 0 success, 1 usage error (bad arguments or config), 2 runtime
//! failure on validated input (e.g. suspected blow-up).

mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_config, Mode};
use experiment::{run_experiment, RunFailure};

#[derive(Parser)]
#[command(name = "dirac1d", version, about = "Nonlinear Dirac equation laboratory")]
struct Cli {
    #[command(subcommand)]
    mode: ModeCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output` field).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (falls back to DIRAC1D_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum ModeCommand {
    /// Integrate the nonlinear Dirac system and record diagnostics.
    Simulate(CommonArgs),
    /// Measure free dispersive decay rates.
    Decay(CommonArgs),
    /// Direct scattering analysis of a characteristic-frame profile.
    Scatter(CommonArgs),
    /// Run a simulation and check the exponential norm bounds.
    CheckBounds(CommonArgs),
    /// Integrate the characteristic-frame scalar evolution equation.
    ScalarEvolve(CommonArgs),
}

impl ModeCommand {
    fn split(self) -> (Mode, CommonArgs) {
        match self {
            ModeCommand::Simulate(a) => (Mode::Simulate, a),
            ModeCommand::Decay(a) => (Mode::Decay, a),
            ModeCommand::Scatter(a) => (Mode::Scatter, a),
            ModeCommand::CheckBounds(a) => (Mode::CheckBounds, a),
            ModeCommand::ScalarEvolve(a) => (Mode::ScalarEvolve, a),
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let (mode, args) = cli.mode.split();

    let threads =
        args.threads.or_else(|| std::env::var("DIRAC1D_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not configure {n} threads: {e}");
        }
    }

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {:?}: {e}", args.config);
            return ExitCode::from(1);
        }
    };
    let parsed = match parse_config(&text, mode) {
        Ok(c) => c,
        Err(issues) => {
            eprintln!("error: invalid config {:?}:", args.config);
            for issue in issues {
                eprintln!("  {issue}");
            }
            return ExitCode::from(1);
        }
    };

    let output = args.output.unwrap_or_else(|| PathBuf::from(&parsed.output));
    match run_experiment(&parsed, mode, &output) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunFailure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(RunFailure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
