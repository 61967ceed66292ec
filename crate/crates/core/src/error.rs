use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sector 2Sz={twice_sz} is empty for {n_sites} sites")]
    EmptySector { n_sites: usize, twice_sz: i32 },

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing coupling value for class `{0}`")]
    MissingCoupling(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("time step failure: achieved local error {achieved:e} > tolerance {tolerance:e}")]
    StepFailure { achieved: f64, tolerance: f64 },

    #[error("rank-deficient state set (smallest Gram eigenvalue {0:e})")]
    RankDeficient(f64),

    #[error("schedule endpoint misclassified: expected {expected}, got {got}")]
    Misclassified { expected: String, got: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
