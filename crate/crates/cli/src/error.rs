use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ornament_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("server: {0}")]
    Server(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// 2 when no periodicity was found, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(ornament_core::Error::NoPeriodicity(_)) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
