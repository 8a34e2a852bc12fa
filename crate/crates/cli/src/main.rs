use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use magrhf_core::io::{load_config, run, RunOptions, Subcommand};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Scf,
    ScfPeriodic,
    ZeroMode,
    BetaBound,
    AlphaC,
    InstabilityScan,
    AlphaScan,
    TfBound,
    CheckInequalities,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Scf => Subcommand::Scf,
            Command::ScfPeriodic => Subcommand::ScfPeriodic,
            Command::ZeroMode => Subcommand::ZeroMode,
            Command::BetaBound => Subcommand::BetaBound,
            Command::AlphaC => Subcommand::AlphaC,
            Command::InstabilityScan => Subcommand::InstabilityScan,
            Command::AlphaScan => Subcommand::AlphaScan,
            Command::TfBound => Subcommand::TfBound,
            Command::CheckInequalities => Subcommand::CheckInequalities,
        }
    }
}

/// Spectral workbench for reduced Hartree-Fock with self-generated magnetic fields.
///
/// Exit status: 0 when every residual is within tolerance, 2 when the run
/// finished with residuals above tolerance, 1 on failure.
#[derive(Debug, Parser)]
#[command(name = "magrhf", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON record and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SCF checkpoint; read as a warm start when it exists, then rewritten.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let opts = RunOptions {
        out: cli.out,
        checkpoint: cli.checkpoint,
        seed: cli.seed,
    };
    let record = run(cli.command.into(), &config, &opts);
    match record.to_json() {
        Ok(json) if opts.out.is_none() => println!("{json}"),
        Ok(_) => {}
        Err(e) => log::error!("could not serialise record: {e}"),
    }
    ExitCode::from(record.exit_code() as u8)
}
