use std::fmt;

/// Errors surfaced by the orchestrator.
///
/// The variant decides the process exit code: configuration-shaped errors
/// (bad flags, unreadable inputs, missing backend) exit with 2, everything
/// else (unwritable outputs, internal faults) exits with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Bad command line: unknown flag, conflicting flags, malformed value.
    #[error("usage error: {0}")]
    Usage(String),
    /// An input (target, dep file, source file) is missing or unreadable.
    #[error("input error: {0}")]
    Input(String),
    /// Backend or fixture configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),
    /// A report or log file could not be written.
    #[error("output error: {0}")]
    Output(String),
    /// A contract inside the pipeline was broken.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors that should exit with code 2 (configuration) rather
    /// than 3 (fatal runtime).
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Usage(_) | Error::Input(_) | Error::Config(_))
    }

    pub(crate) fn input(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        Error::Input(format!("{context}: {err}"))
    }

    pub(crate) fn output(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        Error::Output(format!("{context}: {err}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
