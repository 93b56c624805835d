use thiserror::Error;

/// Errors raised by the analysis kernels and pipeline stages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M^H| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below floor {floor:e}"
    )]
    NotPsd { eigenvalue: f64, floor: f64 },

    #[error("matrix is numerically singular: sigma_min = {sigma_min:e}, threshold {threshold:e}")]
    SingularInput { sigma_min: f64, threshold: f64 },

    #[error("matrix is not unitary: max |U^H U - I| = {deviation:e} exceeds {tolerance:e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} is too small (need at least {min})")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("sequences are not biorthogonal: residual {residual:e} exceeds {tolerance:e}")]
    NotBiorthogonal { residual: f64, tolerance: f64 },

    #[error("pair is not regular at this truncation ({count} vectors in dimension {dim})")]
    NotRegular { dim: usize, count: usize },

    #[error("condition number {kappa:e} exceeds the working limit {limit:e}")]
    ConditioningExceeded { kappa: f64, limit: f64 },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("family is not regular at dimension {dim}: {reason}")]
    FamilyNotRegular { dim: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
