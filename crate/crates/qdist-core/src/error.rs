use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NonHermitianInput(f64),
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NonHermitian(f64),
    #[error("function is not finite on the spectrum (eigenvalue {0:.3e})")]
    SingularInput(f64),
    #[error("right-hand side has weight {0:.3e} on the null space")]
    UnsolvableLyapunov(f64),
    #[error("Kronecker sum is singular (smallest eigenvalue sum {0:.3e})")]
    SingularKroneckerSum(f64),
    #[error("quadrature grid must be odd and at least 3, got {0}")]
    BadGrid(usize),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace {0} is not 1")]
    BadTrace(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("rank {rank} out of range for dimension {dim}")]
    BadRank { dim: usize, rank: usize },
    #[error("Bloch vector norm {0} exceeds 1")]
    BadBloch(f64),
    #[error("invalid probability distribution: {0}")]
    BadDistribution(String),
    #[error("invalid POVM: {0}")]
    BadPovm(String),
    #[error("invalid channel: {0}")]
    BadChannel(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("order {0} outside (0,1)")]
    BadAlpha(f64),
    #[error("frequency vector times n is not integral")]
    NonIntegralCounts,
    #[error("unit-norm Bloch vector makes the optimal direction singular")]
    PureStateVector,
    #[error("state is singular (smallest eigenvalue {0:.3e})")]
    SingularState(f64),
    #[error("base of the operator mean is singular (smallest eigenvalue {0:.3e})")]
    SingularBase(f64),
    #[error("support of the first state is not contained in the support of the second")]
    SupportViolation,
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("difference operator is singular")]
    SingularDelta,
    #[error("functional not supported: {0}")]
    BadFunctional(String),
    #[error("states do not commute (commutator norm {0:.3e})")]
    NonCommuting(f64),
    #[error("outcome has probability {0:.3e}")]
    ZeroProbabilityOutcome(f64),
    #[error("operation must have exactly two outcome groups, got {0}")]
    BadGrouping(usize),
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
