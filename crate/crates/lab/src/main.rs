//! cascade-lab: cascade traces, mean-field phase diagrams, stochastic
//! contagion runs and liability clearing from JSON configs.
//!
//! Exit codes: 0 success, 2 config error, 3 runtime error.

mod config;
mod run;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use config::{parse_config, ExperimentConfig};
use run::run_experiment;

#[derive(Parser)]
#[command(
    name = "cascade-lab",
    version,
    about = "Cascading-failure experiments on networks: deterministic traces, \
             mean-field phase diagrams, voter-model and SIS dynamics, \
             stochastic cascades, and Eisenberg-Noe clearing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic cascade trace on a network
    Trace(RunArgs),
    /// Mean-field (mu, sigma) phase-diagram sweep
    Phase(RunArgs),
    /// Monte Carlo voter model on the complete graph
    Vm(RunArgs),
    /// SIS/SI mean-field trajectory
    Sis(RunArgs),
    /// Stochastic cascade ensemble on a network
    Stochastic(RunArgs),
    /// Eisenberg-Noe liability clearing
    Clearing(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the config's RNG seed (vm, stochastic)
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's replica count (vm, stochastic)
    #[arg(long)]
    replicas: Option<usize>,
    /// Size of the worker thread pool for grid sweeps
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn mode_name(&self) -> &'static str {
        match self {
            Command::Trace(_) => "trace",
            Command::Phase(_) => "phase",
            Command::Vm(_) => "vm",
            Command::Sis(_) => "sis",
            Command::Stochastic(_) => "stochastic",
            Command::Clearing(_) => "clearing",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Trace(a)
            | Command::Phase(a)
            | Command::Vm(a)
            | Command::Sis(a)
            | Command::Stochastic(a)
            | Command::Clearing(a) => a,
        }
    }
}

fn apply_overrides(config: &mut ExperimentConfig, args: &RunArgs) {
    match config {
        ExperimentConfig::Vm(c) => {
            if let Some(seed) = args.seed {
                c.seed = seed;
            }
            if let Some(replicas) = args.replicas {
                c.replicas = replicas;
            }
        }
        ExperimentConfig::Stochastic(c) => {
            if let Some(seed) = args.seed {
                c.seed = seed;
            }
            if let Some(replicas) = args.replicas {
                c.replicas = replicas;
            }
        }
        _ => {}
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();

    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("cascade-lab: cannot configure {threads} threads: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }

    let mut config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cascade-lab: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if config.mode_name() != cli.command.mode_name() {
        eprintln!(
            "cascade-lab: config error: config has mode `{}` but the `{}` subcommand was invoked",
            config.mode_name(),
            cli.command.mode_name()
        );
        return ExitCode::from(EXIT_CONFIG);
    }
    apply_overrides(&mut config, args);
    if let Err(e) = config::validate(&config) {
        eprintln!("cascade-lab: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }

    match run_experiment(&config, &args.out) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cascade-lab: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
