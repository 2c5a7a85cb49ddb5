use thiserror::Error;

/// Broad category of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Invariant,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("network generation failed: {0}")]
    Generation(String),

    #[error("cluster {cluster:?} mixes pinned and non-pinned nodes")]
    MixedCluster { cluster: Vec<usize> },

    #[error("partition is not equitable (leakage {leakage:e})")]
    NotEquitable { leakage: f64 },

    #[error("{context}: off-block residual {residual:e} exceeds {limit:e}")]
    Decomposition {
        context: String,
        residual: f64,
        limit: f64,
    },

    #[error("driven block sizes sum to {driven} but the controllable dimension is {controllable}")]
    RankMismatch { driven: usize, controllable: usize },

    #[error("pinned-node symmetry search refused: N = {n} exceeds limit {max}")]
    SearchTooLarge { n: usize, max: usize },

    #[error("trajectory blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("variational growth became non-finite")]
    NonFiniteGrowth,

    #[error("{0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NotSquare { .. }
            | Error::Asymmetric { .. }
            | Error::DimensionMismatch(_)
            | Error::NotOrthonormal { .. }
            | Error::NonFinite
            | Error::InvalidNetwork(_)
            | Error::Parse { .. }
            | Error::InvalidParameter(_)
            | Error::SearchTooLarge { .. } => ErrorClass::Validation,
            Error::Generation(_)
            | Error::Decomposition { .. }
            | Error::BlowUp { .. }
            | Error::NonFiniteGrowth => ErrorClass::Numerical,
            Error::MixedCluster { .. }
            | Error::NotEquitable { .. }
            | Error::RankMismatch { .. }
            | Error::InvariantViolation(_) => ErrorClass::Invariant,
            Error::Io(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
