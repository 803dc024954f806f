//! `cpc`: command-line runner for checked-circuit sweeps.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for runtime
//! errors.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Experiment;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<cpc_core::Error> for CliError {
    fn from(e: cpc_core::Error) -> Self {
        match e {
            cpc_core::Error::Runtime(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cpc", version, about = "Coherent Pauli check experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a check-count sweep and compare with the model.
    Simulate(Common),
    /// Evaluate the model for a check-count sweep without simulating.
    Model(Common),
    /// Bounds on payload success over a (gate count, error rate) grid.
    Bounds(Common),
    /// Repetition-readout sweep for unanimous and majority decoding.
    Readout(Common),
    /// Emit a checked circuit with its CNOT counts.
    Compile(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Root seed, replacing the configured one.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Override a configuration key, e.g. `--set payload.n=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (experiment, args, simulate) = match &cli.command {
        Command::Simulate(a) => (Experiment::CpcSweep, a, true),
        Command::Model(a) => (Experiment::CpcSweep, a, false),
        Command::Bounds(a) => (Experiment::BoundsReport, a, false),
        Command::Readout(a) => (Experiment::ReadoutSweep, a, false),
        Command::Compile(a) => (Experiment::CompileOnly, a, false),
    };
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let loaded = config::load(&args.config, &args.set, args.seed, experiment)?;
    log::info!("config hash {}", loaded.hash);
    let text = match experiment {
        Experiment::CpcSweep => run::cpc_sweep(&loaded, simulate, args.out.as_deref())?,
        Experiment::ReadoutSweep => run::readout_sweep(&loaded)?,
        Experiment::BoundsReport => run::bounds_report(&loaded)?,
        Experiment::CompileOnly => run::compile_only(&loaded)?,
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
