use thiserror::Error;

/// Errors raised by the laboratory. Every variant maps onto one failure
/// class of the CLI exit-code contract (see [`Error::class`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("interpolation infeasible: {0}")]
    InterpolationInfeasible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("flat-vector search failed: {0}")]
    SearchFailure(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

/// Coarse error classes used by the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Capacity,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Capacity(_) => ErrorClass::Capacity,
            Error::Singular(_) | Error::SearchFailure(_) | Error::DegenerateInput(_) => {
                ErrorClass::Numerical
            }
            _ => ErrorClass::Config,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
