use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square and non-empty")]
    NotSquare,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("degenerate box: zero width along axis {axis}")]
    DegenerateBox { axis: usize },

    #[error("invalid ellipsoid: {0}")]
    InvalidEllipsoid(String),

    #[error("eps must lie strictly between 0 and 1, got {0}")]
    InvalidEps(String),

    #[error("ellipsoid coverings need dimension at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("lattice basis is singular")]
    SingularBasis,

    #[error("dimension {dim} exceeds the enumeration limit {limit}")]
    DimensionLimitExceeded { dim: usize, limit: usize },

    #[error("degenerate slab in row {row}: lower bound must be strictly below upper bound")]
    DegenerateSlab { row: usize },

    #[error("instance has no distance parameter")]
    MissingDistance,

    #[error("2-gap oracle returned an invalid witness: {0}")]
    OracleUnsound(String),

    #[error("gap oracle unsound: {0}")]
    GapOracleUnsound(String),

    #[error("binary search defect: {0}")]
    SearchDefect(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
