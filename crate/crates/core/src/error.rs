use thiserror::Error;

/// Every failure mode surfaced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("resource guard exceeded: {0}")]
    Resource(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid tower: {0}")]
    Tower(String),
    #[error("integrality error: {0}")]
    Integrality(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("stabilization error: {0}")]
    Stabilization(String),
    #[error("unit error: {0}")]
    Unit(String),
    #[error("flag error: {0}")]
    Flag(String),
    #[error("recognition error: {0}")]
    Recognition(String),
    #[error("slope error: {0}")]
    Slope(String),
    #[error("assertion failure: {0}")]
    Assertion(String),
    #[error("certificate violated: {0}")]
    Certificate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by malformed input rather than by a failed check.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Tower(_) | Error::Parse(_) | Error::Shape(_) | Error::Unsupported(_) | Error::Flag(_) | Error::Domain(_)
        )
    }
}
