use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed row {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("expected header `date,inflow`, found `{0}`")]
    BadHeader(String),

    #[error("gap at {0}")]
    Gap(NaiveDate),

    #[error("duplicate or out-of-order date {0}")]
    DuplicateDate(NaiveDate),

    #[error("negative inflow {value} on {date}")]
    NegativeInflow { date: NaiveDate, value: f64 },

    #[error("non-finite inflow on {0}")]
    NonFiniteInflow(NaiveDate),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("degenerate scaler: min {min} equals max {max}")]
    DegenerateScaler { min: f64, max: f64 },

    #[error("constant series: {0}")]
    ConstantSeries(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid range {start}..{end} for length {len}")]
    InvalidRange { start: usize, end: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("checkpoint format version {found} not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
