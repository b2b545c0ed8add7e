use std::path::PathBuf;

use thiserror::Error;

use crate::model::Direction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("direction a/b requires p_a_given_b, which this context does not provide")]
    MissingReverseMatrix,

    #[error("lambda is undefined for outcome {outcome} in direction {direction}: a contributing probability is zero")]
    DegenerateContext { direction: Direction, outcome: usize },

    #[error("context is not trigonometric: {reason}")]
    NotTrigonometric { reason: String },

    #[error("the a-basis is not orthonormal")]
    BasisNotOrthonormal,

    #[error("marginal entry {index} of {observable} is zero; conditionals are undefined")]
    ZeroMarginal { observable: &'static str, index: usize },

    #[error("sequence of length {len} is too short, at least {required} observations are needed")]
    SequenceTooShort { len: usize, required: usize },

    #[error("missing stream {0}")]
    MissingStream(String),

    #[error("prefix density of {set} does not stabilize (late gap {gap:.6} exceeds {threshold:.6})")]
    NotStabilized { set: String, gap: f64, threshold: f64 },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("sequence error at line {line}: {message}")]
    Sequence { line: u64, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
