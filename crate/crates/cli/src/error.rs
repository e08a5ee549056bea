use blowuplab_meshsim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or unreadable configuration; exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// A requested stage did not succeed; exit code 1.
    #[error("{0}")]
    Stage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) | SimError::BadInitialData(_) => CliError::Config(e.to_string()),
            _ => CliError::Stage(e.to_string()),
        }
    }
}

impl From<blowuplab_core::Error> for CliError {
    fn from(e: blowuplab_core::Error) -> Self {
        CliError::Stage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Stage(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Stage(format!("json: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
