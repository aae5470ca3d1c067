//! Config-driven front end for `cqed-core`: device design summary, loss
//! budget, protocol simulation with automatic fitting, offline re-fitting
//! of trace files and the acceptance checks.

pub mod commands;
pub mod config;
pub mod units;

use std::path::PathBuf;

pub use commands::{cmd_budget, cmd_design, cmd_fit, cmd_simulate, cmd_verify, Options};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] cqed_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("fit did not converge: {0}")]
    NotConverged(String),
    #[error("acceptance criteria failed: {0:?}")]
    VerifyFailed(Vec<u8>),
}

impl CliError {
    /// 1 for fits that did not converge (and failed verification), 2 for
    /// bad input of any kind.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NotConverged(_) | CliError::VerifyFailed(_) => 1,
            CliError::Core(cqed_core::Error::Fit(_)) => 1,
            _ => 2,
        }
    }
}
