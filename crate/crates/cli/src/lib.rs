//! Command-line front end: `tune`, `simulate`, `verify` and `demo-pendulum`.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_demo_pendulum, cmd_simulate, cmd_tune, cmd_verify, run};
pub use config::{Overrides, RunConfig};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, incomplete or inadmissible configuration.
    #[error("config error: {0}")]
    Config(String),
    /// A check the command exists to perform came out negative.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<twisting_core::Error> for CliError {
    fn from(err: twisting_core::Error) -> Self {
        use twisting_core::Error as E;
        match err {
            E::NonFiniteState { .. } => CliError::Numerical(err.to_string()),
            E::Case { ref source, .. } if matches!(**source, E::NonFiniteState { .. }) => {
                CliError::Numerical(err.to_string())
            }
            E::Csv(msg) => CliError::Io(std::io::Error::other(msg)),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "twisting",
    version,
    about = "Twisting controller tuning, simulation and verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate tuning parameters, report gain bounds and the settling estimate.
    Tune(CommandArgs),
    /// Simulate one closed-loop trajectory and write it as CSV.
    Simulate(CommandArgs),
    /// Run a boundary/interior campaign against a disturbance battery.
    Verify(CommandArgs),
    /// Reproduce the compensated pendulum runs with plot-ready CSVs.
    DemoPendulum(CommandArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommandArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}
