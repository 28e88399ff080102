use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by network construction, evaluation and training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A neighbourhood sum of raw responses underflowed to zero.
    #[error("degenerate response: inhibition sum for neuron {neuron} is {value}")]
    DegenerateResponse { neuron: usize, value: f64 },

    #[error("non-finite {what} after update {update}")]
    NonFinite { what: &'static str, update: usize },

    #[error("data source exhausted after {0} samples")]
    DataExhausted(usize),

    #[error("{0}")]
    Data(String),

    #[error("analysis: {0}")]
    Analysis(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0}")]
    ConfigValue(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Pnm(#[from] crate::data::pnm::PnmError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
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
