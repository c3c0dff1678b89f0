use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("modulus {0} is too small; the smallest supported prime is 5")]
    ModulusTooSmall(u64),
    #[error("modulus {0} is too large for dense operators")]
    ModulusTooLarge(u64),
    #[error("matrix [[{a}, {b}], [{c}, {d}]] does not have determinant 1 mod {p}")]
    NotSpecialLinear { p: u64, a: u64, b: u64, c: u64, d: u64 },
    #[error("scaling parameter must be a nonzero field element")]
    ZeroScaling,
    #[error("element lies outside the Cayley domain: g - I is singular")]
    OutsideCayleyDomain,
    #[error("cannot phase-normalize the zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambiguous eigenvalue clustering: clusters {gap:.3e} apart (minimum separation {min_gap:.3e})")]
    ClusterAmbiguity { gap: f64, min_gap: f64 },
    #[error("eigendecomposition failed: {0}")]
    Spectral(String),
    #[error("requested {requested} users but the system has {available} signals")]
    TooManyUsers { requested: usize, available: usize },
    #[error("unknown signal label `{0}`")]
    UnknownLabel(String),
    #[error("malformed signal set file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
