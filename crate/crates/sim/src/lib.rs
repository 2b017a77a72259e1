//! Driver library behind the `dmt-sim` binary: config parsing, parallel
//! sweep execution, deterministic file output, and the verify property suite.

pub mod config;
pub mod output;
pub mod runner;
pub mod verify;

/// Command-level failures with the stable exit-code contract:
/// 2 for config errors, 3 for invalid runs, 4 for filesystem trouble
/// (property failures exit 1 without an error value).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    RunInvalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::RunInvalid(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}
