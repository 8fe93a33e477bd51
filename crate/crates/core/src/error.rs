use thiserror::Error;

/// Errors raised by estimators, fitting routines and the data pipeline.
#[derive(Debug, Error)]
pub enum HacError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("insufficient data: need more than {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("non-stationary autoregression: spectral radius {spectral_radius:.6} >= 1")]
    NonStationary { spectral_radius: f64 },

    #[error("singular matrix in {context} (condition number {condition:.3e})")]
    Singular { context: &'static str, condition: f64 },

    #[error("singular VAR filter I - sum(A_k z^k): companion eigenvalue {eigenvalue_re:.6}{eigenvalue_im:+.6}i")]
    SingularFilter { eigenvalue_re: f64, eigenvalue_im: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("every candidate was excluded: {}", .0.join("; "))]
    AllCandidatesExcluded(Vec<String>),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HacError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            HacError::InvalidParameter(_) | HacError::Unsupported(_) => 2,
            HacError::Data(_)
            | HacError::Io(_)
            | HacError::Csv(_)
            | HacError::DimensionMismatch { .. }
            | HacError::InsufficientData { .. } => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HacError>;
