use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("risk level must lie strictly between 0 and 1, got {0}")]
    InvalidRiskLevel(f64),

    #[error("invalid class distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty calibration set")]
    EmptyCalibration,

    #[error("calibration score {0} outside [0, 1]")]
    InvalidScore(f64),

    #[error("option index {index} out of range for {num_options} options")]
    IndexOutOfRange { index: usize, num_options: usize },

    #[error("calibration size must be at least 1")]
    ZeroCalibrationSize,

    #[error("record {id}: {reason}")]
    InvalidRecord { id: String, reason: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("oracle requires tie-free scores")]
    TiedScores,

    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("length mismatch: {sets} prediction sets vs {truths} truths")]
    LengthMismatch { sets: usize, truths: usize },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: no records", .0.display())]
    NoRecords(PathBuf),

    #[error("bad range or list {spec:?}: {reason}")]
    BadRange { spec: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn record(id: &str, reason: impl Into<String>) -> Self {
        Error::InvalidRecord {
            id: id.to_owned(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}
