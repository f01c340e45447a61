use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unsupported size: {0}")]
    Size(String),
    #[error("bidegree mismatch: {0}")]
    Bidegree(String),
    #[error("invalid cutoff: {0}")]
    Cutoff(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("quadrature did not converge: value {value}, error {error:.3e} > tol {tol:.3e}")]
    NotConverged { value: num_complex::Complex64, error: f64, tol: f64 },
    #[error("series is not Cauchy: {0}")]
    NotCauchy(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
