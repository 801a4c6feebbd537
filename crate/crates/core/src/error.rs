use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("found only {found} sign changes of the characteristic function below mu = {mu_max}, need {wanted}")]
    BracketFailure {
        found: usize,
        wanted: usize,
        mu_max: f64,
    },
    #[error("basis index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFiniteValue(&'static str),
    #[error("p = {0} is outside (2, 3)")]
    InvalidP(f64),
    #[error("K = {k} must exceed p*E(0) = {bound}")]
    InvalidK { k: f64, bound: f64 },
    #[error("not a blow-up candidate: {0}")]
    NotBlowupCandidate(String),
    #[error("dual norm bound violated: ratio {ratio} in trial {trial}")]
    BoundViolation {
        trial: usize,
        ratio: f64,
        witness: Vec<f64>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
