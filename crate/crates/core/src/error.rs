use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid shape {0:?}: extents must be positive")]
    InvalidShape(Vec<usize>),

    #[error("element count mismatch: {expected} vs {found}")]
    ElementCount { expected: usize, found: usize },

    #[error("invalid tensor-ring ranks {ranks:?} for order {order}")]
    InvalidRanks { ranks: Vec<usize>, order: usize },

    #[error("core chain broken between core {left} and core {right}")]
    ChainMismatch { left: usize, right: usize },

    #[error("tensor-ring operations need order >= 3, got {0}")]
    OrderTooLow(usize),

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("observation mask has no observed entries")]
    EmptyMask,

    #[error("missing rate {0} outside [0, 1)")]
    InvalidMissingRate(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("solver diverged: non-finite iterate at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("reference tensor has zero norm")]
    ZeroReference,

    #[error("malformed {kind} file: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            kind,
            reason: reason.into(),
        }
    }
}
