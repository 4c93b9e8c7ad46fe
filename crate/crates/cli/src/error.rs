use std::fmt;

use meshalign_core::io::IoError;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input (exit 2).
    Input(String),
    /// Geometry the algorithms cannot work with (exit 3).
    Degenerate(String),
    /// Non-finite values or an infeasible numerical search (exit 4).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Degenerate(_) => 3,
            Self::Numerical(_) => 4,
        }
    }

    pub fn input(e: impl fmt::Display) -> Self {
        Self::Input(e.to_string())
    }

    pub fn degenerate(e: impl fmt::Display) -> Self {
        Self::Degenerate(e.to_string())
    }

    pub fn numerical(e: impl fmt::Display) -> Self {
        Self::Numerical(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) => write!(f, "input error: {m}"),
            Self::Degenerate(m) => write!(f, "degenerate geometry: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::Input(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
