use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] estkit_core::Error),
    /// The run finished but some trials stopped at their iteration limit;
    /// outputs hold the partial estimates.
    #[error("{0} trials did not converge; partial results were written")]
    PartialResults(usize),
    #[error("{0} checks failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// `1` for solver non-convergence and failed checks, `2` otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(estkit_core::Error::NotConverged(_))
            | CliError::PartialResults(_)
            | CliError::ChecksFailed(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
