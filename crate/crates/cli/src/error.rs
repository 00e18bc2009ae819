use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or values.
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    /// A malformed or inconsistent input file.
    #[error("{0}")]
    Format(String),

    #[error("{context}: {source}")]
    Core { context: String, source: qmetts::Error },

    /// A tolerance or invariant check failed.
    #[error("check failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn core(context: impl Into<String>) -> impl FnOnce(qmetts::Error) -> Self {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
