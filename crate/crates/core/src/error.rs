use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension/order pair outside the admissible range.
    #[error("invalid problem parameters: requires n > 2k >= 2 (got n = {n}, k = {k})")]
    Domain { n: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid has {got} nodes, below the stencil minimum of {min}")]
    GridTooSmall { got: usize, min: usize },

    #[error("derivative order {requested} exceeds the maximum supported order {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("non-finite value at node {index} (r = {r})")]
    NonFinite { index: usize, r: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("singular matrix: zero pivot in column {column}")]
    Singular { column: usize },

    #[error("singular Jacobian at lambda = {lambda} (guess sup-norm {guess_norm:e})")]
    SingularJacobian { lambda: f64, guess_norm: f64 },

    #[error("no convergence after {iterations} iterations: {detail}")]
    NotConverged { iterations: usize, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
