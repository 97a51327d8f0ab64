use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("need at least {min} particles, got {got}")]
    Size { min: usize, got: usize },

    #[error("index {index} out of range for {len} particles")]
    Index { index: usize, len: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("invalid sampler state: {0}")]
    InvalidState(String),

    #[error("non-finite input: {0}")]
    Numeric(String),

    /// A run stopped at `stage` (1-based) of `group`.
    #[error("run aborted at stage {stage} of group {group}: {source}")]
    Aborted {
        stage: usize,
        group: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// The stage index of an aborted run, if this error is one.
    pub fn aborted_stage(&self) -> Option<usize> {
        match self {
            Error::Aborted { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
