use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in state at node {node}")]
    NonFiniteState { node: usize },

    #[error("explicit step became unstable at sub-step {substep} (increase n_sub)")]
    UnstableStep { substep: usize },

    #[error("sensor index {index} out of range for {n_x} nodes")]
    BadSensorIndex { index: usize, n_x: usize },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("finite-difference Jacobian column {column} is non-finite")]
    JacobianFailure { column: usize },

    #[error("innovation covariance is numerically singular")]
    SingularInnovation,

    #[error("reference state has zero absolute sum")]
    DegenerateReference,

    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error("invalid config key `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable error-class name, printed by the CLI.
    pub fn class(&self) -> &'static str {
        match self {
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::UnstableStep { .. } => "UnstableStep",
            Error::BadSensorIndex { .. } => "BadSensorIndex",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::JacobianFailure { .. } => "JacobianFailure",
            Error::SingularInnovation => "SingularInnovation",
            Error::DegenerateReference => "DegenerateReference",
            Error::Parse(_) => "ParseError",
            Error::Validation { .. } => "ValidationError",
            Error::Io(_) => "IoError",
            Error::AtStep { source, .. } => source.class(),
        }
    }

    pub(crate) fn validation(key: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                step,
                source: Box::new(e),
            },
        }
    }
}
