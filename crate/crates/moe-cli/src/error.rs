//! Driver errors, split by exit code: usage problems exit with 1, data
//! problems with 2. Data errors always name the stage that rejected the
//! input so a failing multi-stage invocation points at the right file.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong: unknown flags, bad values, or a
    /// missing subcommand.
    Usage(String),
    /// A stage rejected its inputs: unreadable or malformed files, invalid
    /// configuration, or a computation that failed on the given data.
    Data {
        stage: &'static str,
        reason: String,
    },
}

impl CliError {
    pub fn data(stage: &'static str, reason: impl Into<String>) -> Self {
        CliError::Data {
            stage,
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(reason) => write!(f, "usage: {reason}"),
            CliError::Data { stage, reason } => write!(f, "{stage}: {reason}"),
        }
    }
}

impl std::error::Error for CliError {}
