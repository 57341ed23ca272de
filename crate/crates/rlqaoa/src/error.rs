use std::path::PathBuf;

/// Harness failures, grouped by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Run(_) | CliError::Io { .. } => 2,
            CliError::Verify(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<rlqaoa_core::Error> for CliError {
    fn from(e: rlqaoa_core::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
