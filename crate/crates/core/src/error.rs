use thiserror::Error;

/// Failure classes shared by every module.
///
/// The CLI maps each class onto a distinct exit code, so variants are grouped
/// by what went wrong rather than by which module raised them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation
    /// (forbidden energy gap, threshold singularity, negative integrand).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller broke a branch or role contract, e.g. a momentum on the wrong
    /// half-line or a mixed-sign grid handed to a single-branch operation.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Quadrature would alias or the test function is not resolved.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Wave packet density reached the edge of its grid.
    #[error("grid leakage: {0}")]
    Leakage(String),

    #[error("no tunneling: energy {energy} is not below the barrier top {top}")]
    NoTunneling { energy: f64, top: f64 },

    #[error("ambiguous barrier: {0}")]
    Ambiguous(String),

    /// Malformed input data (lengths, ordering, non-finite values).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for the resolution/aliasing family.
    pub fn is_resolution(&self) -> bool {
        matches!(self, Error::Resolution(_) | Error::Leakage(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
