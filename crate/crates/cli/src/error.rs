use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rsqs::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output encoding failed: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Encode(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Wrap a core error raised while turning a config into model objects.
pub fn invalid(e: rsqs::Error) -> CliError {
    CliError::Config(e.to_string())
}
