use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration has {got} particles, sector expects {expected}")]
    CardinalityMismatch { expected: usize, got: usize },

    #[error("rank {index} out of range for sector of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("site outside ambient interval")]
    SiteOutsideAmbient,

    #[error("{0}")]
    Geometry(String),

    #[error("ambient intervals differ: {0} vs {1}")]
    AmbientMismatch(String, String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator is not symmetric within tolerance (max deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("operator is not particle-number conserving")]
    NotConserving,

    #[error("sector dimension {dim} exceeds dense solver cap {cap}")]
    SectorTooLarge { dim: usize, cap: usize },

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("function produced a non-finite value at x = {0}")]
    NonFinite(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
