use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(qsm_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<qsm_core::Error> for CliError {
    fn from(e: qsm_core::Error) -> Self {
        match e {
            qsm_core::Error::InvalidParameter(_) | qsm_core::Error::GridError(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}
