//! Library side of the harness binary: the bundled g = 82 reference dataset,
//! the verification campaign, and the subcommand implementations.

pub mod commands;
pub mod fixture;
pub mod table82;
pub mod verify;

use thiserror::Error;

/// Exit codes: 0 pass, 1 verification failure, 2 usage or precondition
/// violation, 3 resource limit.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gapcycles::Error),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(gapcycles::Error::MemoryBudget { .. }) => 3,
            CliError::Core(gapcycles::Error::CycleFile(gapcycles::CycleFileError::Io(_))) => 3,
            CliError::Io(_) => 3,
            _ => 2,
        }
    }
}
