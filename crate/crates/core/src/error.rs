use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: truncated record at byte offset {offset} (file length {len}, record size {record})")]
    Truncated {
        path: PathBuf,
        offset: u64,
        len: u64,
        record: usize,
    },

    #[error("scan/label length mismatch: {points} points vs {labels} labels")]
    LengthMismatch { points: usize, labels: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("degenerate point at the sensor origin")]
    DegeneratePoint,

    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rotation step {k} exceeds the admissible range ±{max}")]
    RotationOutOfRange { k: i64, max: i64 },

    #[error("point cloud has no labels")]
    MissingLabels,

    #[error("label list is empty")]
    EmptyLabels,

    #[error("class id {0} is not present in the instance database")]
    UnknownClass(u16),

    #[error("database format version mismatch: file has {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt database: {message} (record {record})")]
    CorruptDatabase { record: usize, message: String },

    #[error("sensor model mismatch between database and pipeline")]
    SensorMismatch,

    #[error("scene pool error: {0}")]
    ScenePool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
