use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration field failed validation.
    #[error("invalid `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("{what} {value} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid antenna set {antennas:?}: {reason}")]
    AntennaSet { antennas: Vec<usize>, reason: String },

    #[error("ML search space of {size} hypotheses exceeds the limit of {limit}; use the SSD detector")]
    SearchSpace { size: u128, limit: u128 },

    #[error("SNR is undefined for a noiseless link")]
    Noiseless,

    #[error("no trial outcomes to aggregate")]
    EmptyOutcomes,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
