use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `∂_y^{-1}` is only defined for data whose integral vanishes.
    #[error("zero-mass constraint violated: |mass| = {residual:e} exceeds tolerance {tolerance:e}")]
    ZeroMassViolation { residual: f64, tolerance: f64 },

    /// A sample reached `|q| >= 1` (or the configured ceiling).
    #[error("constraint violated: max |q| = {max_abs} (limit {limit})")]
    ConstraintViolation { max_abs: f64, limit: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step rejected at t = {t}: max |q| = {max_abs} reached the ceiling {limit}; retry with dt <= {suggested_dt:e}")]
    StepRejected {
        t: f64,
        max_abs: f64,
        limit: f64,
        suggested_dt: f64,
    },

    #[error("Picard iteration is not contracting (distances {distances:?}); the step is too large")]
    ContractionFailure { distances: Vec<f64> },

    #[error("Picard iteration did not reach tolerance {tol:e} in {iterations} iterations (last distance {last:e})")]
    ConvergenceFailure {
        iterations: usize,
        tol: f64,
        last: f64,
    },

    #[error("no admissible step >= {min_step:e} satisfies the local existence bounds")]
    InfeasibleStep { min_step: f64 },

    #[error("hodograph map is not invertible: max |q| = {max_abs}")]
    NonInvertibleMap { max_abs: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
