use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bad initial data: {0}")]
    BadInitialData(String),
    #[error("step size underflow at t={t} (dt={dt:e}); the mesh cannot resolve the layer, increase M")]
    StepSizeUnderflow { t: f64, dt: f64 },
    #[error("mesh tangling at t={t}: node ordering violated after repeated step rejection")]
    MeshTangling { t: f64 },
    #[error("fit window too short: {0}")]
    WindowTooShort(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("io: {0}")]
    Io(String),
}

pub type SimResult<T> = std::result::Result<T, SimError>;

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::Io(e.to_string())
    }
}
