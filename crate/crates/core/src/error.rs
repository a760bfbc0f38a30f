use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{a} is not invertible modulo {q}")]
    NotInvertible { a: i64, q: u64 },

    #[error("parameter s_{index} = {value} is not coprime to q = {q}")]
    NotCoprime { index: usize, value: i64, q: u64 },

    #[error("lens space needs at least two parameters, got {0}")]
    DimensionTooSmall(usize),

    #[error("q must be positive")]
    ZeroOrder,

    #[error("no spin structure (q even, m odd)")]
    NoSpinStructure,

    #[error("spin label {label} is not admissible for q = {q}, m = {m}")]
    InadmissibleSpin { label: String, q: u64, m: usize },

    #[error("lens spaces differ in shape: {0}")]
    Mismatch(String),

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid half-integer vector: coordinate {0} of the doubled vector is even")]
    EvenCoordinate(usize),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("enumeration bound {bound} exceeds the limit {limit}")]
    TooLarge { bound: f64, limit: f64 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
