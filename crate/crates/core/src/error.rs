use thiserror::Error;

/// Errors raised by the decision engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid space layout: {0}")]
    Layout(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not one (got {0})")]
    InvalidTrace(f64),

    #[error("operator is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("zero vector cannot define a state")]
    ZeroVector,

    #[error("mixture weights are negative or all zero")]
    InvalidWeights,

    #[error("vectors are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("impossible conditioning: Tr(rho P) = {0:e}")]
    ImpossibleConditioning(f64),

    #[error("consistency violation: {0}")]
    Consistency(String),

    #[error("feelings are not normalized (residual {0:e})")]
    Unnormalized(f64),

    #[error("zero total weight in normalization")]
    ZeroWeight,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate denominator: {0}")]
    Degenerate(String),

    #[error("information gain diverges: {0}")]
    Divergence(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("decision windows overlap: {0}")]
    OverlappingWindows(String),

    #[error("quadrature failed to converge (estimated error {0:e})")]
    Quadrature(f64),
}

/// Coarse classification used by front ends to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A model invariant or modeling precondition was violated.
    Invariant,
    /// A numerical quantity diverged or failed to converge.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NonFinite(_) | Error::Divergence(_) | Error::Quadrature(_) => {
                ErrorClass::Numerical
            }
            _ => ErrorClass::Invariant,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
