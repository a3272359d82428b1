use std::fmt;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    /// I/O and anything unexpected.
    Internal = 1,
    /// Bad flags, malformed or invalid files, unmet preconditions.
    Invalid = 2,
    Budget = 3,
    InfeasibleAtBudget = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::Invalid,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::usage(message)
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError {
            status: ExitStatus::Internal,
            message: format!("{context}: {err}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<securefn_core::Error> for CliError {
    fn from(e: securefn_core::Error) -> Self {
        let status = match e {
            securefn_core::Error::Budget { .. } => ExitStatus::Budget,
            _ => ExitStatus::Invalid,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
