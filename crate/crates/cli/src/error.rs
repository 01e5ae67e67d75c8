use std::path::PathBuf;

use shapegraph_core::Error as CoreError;

/// CLI-level errors. Exit codes: 2 for configuration problems, 3 for data
/// problems, 4 for numerical failures, 1 for IO and everything else.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numeric(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(CliError) -> CliError {
        move |source| CliError::Stage { stage, source: Box::new(source) }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        move |source| CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Parameter(_) => CliError::Config(err.to_string()),
            CoreError::Parse { .. }
            | CoreError::Schema(_)
            | CoreError::NoLabels
            | CoreError::EmptyMask
            | CoreError::Dimension(_) => CliError::Data(err.to_string()),
            CoreError::NonFinite(_)
            | CoreError::NonConvergence { .. }
            | CoreError::Diverged { .. } => CliError::Numeric(err.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
