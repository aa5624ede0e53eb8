use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("density operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    #[error("density operator is not positive definite (min eigenvalue {min:.3e}, max {max:.3e})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("density operator has trace {0} instead of 1")]
    TraceNotOne(f64),

    #[error("tensor is not a one-form (|mu| = {0:.3e})")]
    NotAOneForm(f64),

    #[error("tensor is not a two-form (|mu_2| = {0:.3e})")]
    NotATwoForm(f64),

    #[error("invalid momentum space: {0}")]
    InvalidMomentumSpace(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("operator is not in D(A, rho): {0}")]
    DomainViolation(String),

    #[error("operator is not a derivation (relative residual {0:.3e})")]
    NotADerivation(f64),

    #[error("reconstruction mismatch: {0}")]
    ReconstructionMismatch(String),

    #[error("commutant too small: requested {requested} momenta, available real dimension {available}")]
    CommutantTooSmall { requested: usize, available: usize },

    #[error("this construction requires the tracial state")]
    RequiresTracialState,

    #[error("functional is not a modular cochain")]
    NotACochain,

    #[error("unsupported cochain dimension {0}")]
    UnsupportedDimension(usize),

    #[error("exactness criteria disagree: {0}")]
    InternalInconsistency(String),

    #[error("operator is not elliptic (min eigenvalue {0:.3e})")]
    NotElliptic(f64),

    #[error("operator is not exact")]
    NotExact,

    #[error("metric is not positive (min eigenvalue {0:.3e})")]
    NotAMetric(f64),

    #[error("metric kernel is invalid: {0}")]
    InvalidKernel(String),

    #[error("metric does not satisfy the KMS condition: {0}")]
    NotKms(String),

    #[error("skew extraction failed: real dimension {skew} vs rank {rank}")]
    SkewExtractionFailure { skew: usize, rank: usize },

    #[error("momentum does not commute with the density operator (residual {0:.3e})")]
    CommutantViolation(f64),

    #[error("state pairing is singular")]
    SingularPairing,

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("not a state: {0}")]
    NotAState(String),

    #[error("state is not invariant under the semigroup (residual {0:.3e})")]
    StateNotInvariant(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("state algebras are incompatible: {0}")]
    IncompatibleStateAlgebras(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("vectorization convention mismatch: expected \"column-major\", found {0:?}")]
    ConventionMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
