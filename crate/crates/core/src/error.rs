use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid duration {0}: must be positive")]
    InvalidDuration(f64),
    #[error("invalid attention band: alpha_min {min} must be below alpha_max {max}")]
    InvalidBand { min: f64, max: f64 },
    #[error("empty series: {0}")]
    EmptySeries(&'static str),
    #[error("invalid energy normalization: E_max = {0}")]
    InvalidNormalization(f64),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("arm {0} has not been pulled")]
    UnpulledArm(usize),
    #[error("window {window} larger than history length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("handover configuration unreachable: {0}")]
    Unreachable(String),
    #[error("invalid arm: {0}")]
    InvalidArm(String),
    #[error("trajectory needs at least 2 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("human reach unreachable: {0}")]
    UnreachableHandover(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("incomplete run log: {0}")]
    IncompleteLog(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
