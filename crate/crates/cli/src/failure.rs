//! Failure classification onto distinct exit codes.

use std::fmt;

use trident_core::Error as CoreError;

/// Exit code classes: 2 configuration, 3 input/output, 4 computation.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Compute(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Failure::Io(msg.into())
    }

    pub fn compute(msg: impl Into<String>) -> Self {
        Failure::Compute(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Io(m) => write!(f, "io error: {m}"),
            Failure::Compute(m) => write!(f, "computation error: {m}"),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Io { .. } | CoreError::MalformedRow { .. } => Failure::Io(e.to_string()),
            CoreError::InvalidParameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
