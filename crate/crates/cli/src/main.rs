use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sedres_cli::commands;
use sedres_cli::config::RunConfig;

/// Batch simulation and verification toolkit for a charged oscillator
/// driven by the zero-point radiation field.
#[derive(Parser)]
#[command(name = "sedres", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override ensemble.master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the driven-oscillator ensemble and write trajectories.
    Simulate(RunArgs),
    /// Linear-response sweeps: susceptibility, response function, spectrum.
    Respond(RunArgs),
    /// Bracket algebra: response matrices and commutator checks.
    Brackets(RunArgs),
    /// Coarse-graining scale estimates for the electron.
    Scales(RunArgs),
    /// Run the full verification suite.
    Verify(RunArgs),
}

fn load_config(args: &RunArgs) -> Result<RunConfig, String> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => String::new(),
    };
    let mut config = RunConfig::parse(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        config.ensemble.master_seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&RunConfig) -> anyhow::Result<bool>) = match &cli.command {
        Command::Simulate(a) => (a, commands::simulate),
        Command::Respond(a) => (a, commands::respond),
        Command::Brackets(a) => (a, commands::brackets),
        Command::Scales(a) => (a, commands::scales),
        Command::Verify(a) => (a, commands::verify),
    };
    let config = match load_config(args) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("{message}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
