//! `kpplab`: config-driven experiments on the Fisher-KPP equation with a
//! time-dependent growth rate.
//!
//! Each subcommand resolves an [`ExperimentConfig`], runs one analysis from
//! `kpp-core` and writes JSON and CSV artifacts that embed the resolved
//! config, the seed and the tool version.

pub mod app;
pub mod artifact;
pub mod commands;
pub mod config;

pub use app::run;
pub use commands::{execute, Outcome, Status};
pub use config::{Command, ExperimentConfig, PathSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] kpp_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Process exit code: 2 for bad input, 3 when the horizon is too short
    /// to decide, 4 when a checked property fails, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        use kpp_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::HorizonTooShort(_) | E::InsufficientHistory { .. } | E::NoFront { .. } | E::NoAdmissibleBlock { .. } => 3,
                E::NonFinite { .. } => 4,
                E::Io(_) => 1,
                _ => 2,
            },
        }
    }
}
