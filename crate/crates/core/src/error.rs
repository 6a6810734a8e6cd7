use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building or operating on
/// configurations, measures and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mark must be positive and finite, got {mark}")]
    NonPositiveMark { mark: f64 },
    #[error("weight must be positive and finite, got {weight}")]
    NonPositiveWeight { weight: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {value} is not finite")]
    NonFiniteCoordinate { value: f64 },
    #[error("test function returned non-finite value {value}")]
    NonFiniteValue { value: f64 },
    #[error("test function is declared on the wrong domain: expected {expected}")]
    DomainMismatch { expected: &'static str },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("window is unbounded")]
    UnboundedWindow,
    #[error("window has zero volume")]
    DegenerateWindow,
    #[error("configuration is not pinpointing: two points at position {position:?}")]
    NotPinpointing { position: Vec<f64> },
    #[error("mark density is not numerically integrable: {0}")]
    NonIntegrableDensity(String),
    #[error("theta must be positive and finite, got {0}")]
    InvalidTheta(f64),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("marks must differ, both are {0}")]
    EqualMarks(f64),
    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
