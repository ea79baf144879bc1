use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {level} out of range (allowed {min}..={max})")]
    LevelOutOfRange { level: u32, min: u32, max: u32 },

    #[error("path of level 0 has no midpoints to difference")]
    NoMidpoints,

    #[error("expected {expected} values for level {level}, got {actual}")]
    LengthMismatch { level: u32, expected: usize, actual: usize },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("sample size {n} too small (need at least {min})")]
    SampleTooSmall { n: usize, min: usize },

    #[error("sample value {value} at index {index} is not strictly inside (0, 1)")]
    SampleOutOfRange { index: usize, value: f64 },

    #[error("tied observations at value {value}; the uniform generator produced a degenerate sample")]
    Ties { value: f64 },

    #[error("sample is not sorted at index {index}")]
    Unsorted { index: usize },

    #[error("consecutive order statistics too close to form distinct interpolation nodes near {value}")]
    DegenerateSpacing { value: f64 },

    #[error("evaluation point {0} outside [0, 1]")]
    PointOutOfRange(f64),

    #[error("cell index k={k} out of range 1..={max} at level {level}")]
    CellOutOfRange { level: u32, k: u64, max: u64 },

    #[error("expected a {expected} path, got a {actual} path")]
    WrongKind { expected: &'static str, actual: &'static str },

    #[error("invalid setting `{key}`: {message}")]
    InvalidSetting { key: String, message: String },

    #[error("enumeration instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("replicate partials do not cover 0..{expected}: {detail}")]
    ReplicateCoverage { expected: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub(crate) fn setting(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidSetting { key: key.into(), message: message.into() }
    }
}
