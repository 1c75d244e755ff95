use thiserror::Error;

/// Failure to turn expression text into a tree.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at column {}: {message}", position + 1)]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at column {}", position + 1)]
    UnknownIdentifier { name: String, position: usize },
    #[error("unknown function `{name}` at column {}", position + 1)]
    UnknownFunction { name: String, position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::UnknownFunction { position, .. } => *position,
        }
    }
}

/// An expression was evaluated outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{expr}` at {point:?}: {reason}")]
pub struct DomainError {
    /// The offending subexpression, pretty-printed.
    pub expr: String,
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("frame is singular at {point:?}")]
    SingularFrame { point: Vec<f64> },
    #[error("density `{name}` is not positive at {point:?} (value {value})")]
    NonPositiveDensity {
        name: String,
        point: Vec<f64>,
        value: f64,
    },
    #[error("not a sub-Laplacian: second-order part differs from the cometric by {mismatch:e}")]
    NotSubLaplacian { mismatch: f64 },
    #[error("flow left the domain at step {step}: {source}")]
    FlowDomainExit {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("flow produced a non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("missing required input: {0}")]
    MissingInput(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
