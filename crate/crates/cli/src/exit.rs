use std::fmt;
use std::path::Path;

use uqreg::UqError;

/// Process exit codes. These four are the only ones the binary returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    /// The axiom suite disagreed with the expected verdict matrix, or a
    /// reproducer disagreed with its oracle.
    Deviation = 1,
    /// Bad arguments or configuration.
    Usage = 2,
    /// Numerical or I/O failure.
    Failure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::Usage,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError {
            status: ExitStatus::Failure,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<UqError> for CliError {
    fn from(e: UqError) -> Self {
        let status = if e.is_usage() { ExitStatus::Usage } else { ExitStatus::Failure };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
