use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radius profile is not concave: R({mid}) = {value} below chord {chord}")]
    NotConcave { mid: f64, value: f64, chord: f64 },

    #[error("negative radius {value} at t = {t}")]
    NegativeRadius { t: f64, value: f64 },

    #[error("origin is not an interior point of the body")]
    OriginNotInterior,

    #[error("profile is not integrable against r^(n-1) (n = {n})")]
    DivergentIntegral { n: usize },

    #[error("inverse-cdf tabulation failed: {0}")]
    Tabulation(String),

    #[error("profile derivative required but not supplied")]
    MissingDerivative,

    #[error("test function has zero gradient energy on the sample")]
    ZeroGradient,

    #[error("gradient sup-norm of `{0}` is unbounded")]
    UnboundedGradient(String),

    #[error("dictionary lacks coordinate function x{0}")]
    MissingCoordinate(usize),

    #[error("not enough samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("covariance is singular (eigenvalue ratio {ratio:e})")]
    SingularCovariance { ratio: f64 },

    #[error("descriptor error: {0}")]
    Descriptor(String),

    #[error("batch format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
