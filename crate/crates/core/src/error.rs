use thiserror::Error;

/// Everything that can go wrong while building moments, matrices or polynomials.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method stopped before reaching working precision.
    #[error("{what} did not converge after {iterations} iterations ({detail})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        detail: String,
    },

    /// A computation produced NaN or an infinity.
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),

    /// A moment table was asked for an entry it does not hold.
    #[error("moment table does not cover mu[{i}][{j}]")]
    Coverage { i: usize, j: usize },

    /// A recursion was solved for a term whose coefficient vanishes.
    #[error("singular coefficient: {0}")]
    SingularCoefficient(String),

    /// A linear system is singular at working precision.
    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    /// Gram-Schmidt hit a non-positive norm.
    #[error("non-positive norm for flag element v_{0}")]
    Degenerate(usize),

    #[error("cannot parse {0:?} as a real number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
