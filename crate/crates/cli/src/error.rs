use thiserror::Error;

/// Failures of a command, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent input. Exit 2.
    #[error("config error: {0}")]
    Config(String),
    /// A check ran to completion and failed. Exit 1.
    #[error("verification failed: {0}")]
    Failed(String),
    #[error("no causal curve joins the endpoints")]
    NoCausalCurve,
    /// Anything else raised while computing. Exit 3.
    #[error(transparent)]
    Core(#[from] conewarp::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) | CliError::NoCausalCurve => 1,
            CliError::Config(_) => 2,
            CliError::Core(conewarp::Error::NoCausalCurve) => 1,
            CliError::Core(_) | CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
