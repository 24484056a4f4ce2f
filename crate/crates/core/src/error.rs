use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants fall into two families: invalid input (caller contract violated)
/// and numerical failure (a computation could not deliver its guarantee).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve is not nondecreasing near delta = {at}")]
    NonMonotoneCurve { at: f64 },
    #[error("curve violates its declared shape ({shape}) near delta = {at}")]
    ShapeViolation { shape: &'static str, at: f64 },
    #[error("operation requires a {required} curve")]
    ShapeMismatch { required: &'static str },
    #[error("grid is empty or malformed: {0}")]
    EmptyGrid(String),
    #[error("fixed-point iteration increased at step {step}")]
    NotContractive { step: usize },
    #[error("delta = {0} is not a grid point")]
    OffGrid(f64),
    #[error("class values leave the unit interval: {0}")]
    RangeViolation(String),
    #[error("oracle cannot compute {0}")]
    OracleUnavailable(String),
    #[error("delta-minimal set is empty at delta = {0}")]
    EmptyMinimalSet(f64),
    #[error("class values are not binary")]
    NotBinary,
    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("tables are indexed by different grids")]
    GridMismatch,
    #[error("envelope does not dominate its raw table at delta = {at}")]
    EnvelopeViolated { at: f64 },
    #[error("link function is degenerate: phi(sqrt(eps)) = {value} >= 1")]
    LinkDegenerate { value: f64 },
    #[error("model family is not nested")]
    NotNested,
    #[error("per-model constants are not ordered: {0}")]
    BadOrdering(String),
    #[error("loss exceeds its Lipschitz constant at (y, u, v) = ({y}, {u}, {v})")]
    LipschitzViolated { y: f64, u: f64, v: f64 },
    #[error("loss violates its convexity modulus at (y, u, v) = ({y}, {u}, {v})")]
    ConvexityViolated { y: f64, u: f64, v: f64 },
    #[error("summary is missing field `{0}`")]
    MissingField(String),
}

impl Error {
    /// True for numerical failures, false for input validation errors.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotContractive { .. }
                | Error::EigenFailure(_)
                | Error::OracleUnavailable(_)
                | Error::EmptyMinimalSet(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
