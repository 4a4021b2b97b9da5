use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("theta squares are not certified rationally independent; {0} refused")]
    Uncertified(&'static str),

    #[error("invalid theta entry `{0}`")]
    BadTheta(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration budget exceeded: {needed} candidates > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("box mismatch: field radius {field} < system radius {system}")]
    BoxMismatch { field: u32, system: u32 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("aliasing: spectral tail fraction {tail:.3e} exceeds {limit:.1e}")]
    Aliasing { tail: f64, limit: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite value at t = {t}: {what}")]
    NonFinite { t: f64, what: String },

    #[error("amplitude too large: {0}")]
    AmplitudeTooLarge(String),

    #[error("cost guard: {needed} work units exceed budget {budget}")]
    CostGuard { needed: u128, budget: u128 },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
