use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("dimension d = {0} is not supported (expected 3, 4 or 5)")]
    InvalidDimension(u32),

    #[error("potential strength a = {a} must exceed -(d-2)^2/4 = {bound}")]
    BelowHardy { a: f64, bound: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("quadratic form is negative ({value:e}); a is outside the Hardy range or the grid is too coarse")]
    NegativeForm { value: f64 },

    #[error("Pohozaev residual {residual:e} exceeds tolerance {tolerance:e}")]
    Pohozaev { residual: f64, tolerance: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("modulation fit did not converge after {iterations} iterations (residuals {residuals:?})")]
    FitNonConvergence { iterations: usize, residuals: [f64; 2] },

    #[error("modulation scale mu = {mu:e} is outside the range resolvable on the grid")]
    ScaleOutOfRange { mu: f64 },

    #[error("curvature cap violated: max phi'' = {max_curvature}")]
    CurvatureCap { max_curvature: f64 },

    #[error("invalid virial radius: {0}")]
    InvalidRadius(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
