use thiserror::Error;

/// Errors raised by the spectral, oracle, solver and diagnostics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains non-finite values ({count} of {total})")]
    InvalidField { count: usize, total: usize },

    #[error("fields live on different grids or have different arity")]
    GridMismatch,

    #[error("expected {expected} component(s), found {found}")]
    ArityError { expected: usize, found: usize },

    #[error("spectrum is not Hermitian: max asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    HermitianViolation { asymmetry: f64, tolerance: f64 },

    #[error("negative-order operator applied to a field with mean {mean:e}")]
    MeanNotZero { mean: f64 },

    #[error("invalid time {0}")]
    InvalidTime(f64),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("field is not localized: boundary magnitude {boundary:e} exceeds {limit:e}")]
    NotLocalized { boundary: f64, limit: f64 },

    #[error("quadrature supports orders alpha < 2, got {0}")]
    UnsupportedOrder(f64),

    #[error("double sum over {points} points exceeds the limit of {limit}; use a subsample stride")]
    TooExpensive { points: usize, limit: usize },

    #[error("density has the wrong sign: extreme value {value:e}")]
    SignViolation { value: f64 },

    #[error("support too wide: {value:e} of peak found beyond a quarter box from the center")]
    SupportTooWide { value: f64 },

    #[error("mollifier radius {radius} is below two grid cells ({min})")]
    UnderResolvedMollifier { radius: f64, min: f64 },

    #[error("field is under-resolved: tail energy fraction {fraction:e} exceeds {limit:e}")]
    UnderResolved { fraction: f64, limit: f64 },

    #[error("time step {dt:e} exceeds the admissible {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("exponent p = {0} must lie in [1, inf]")]
    InvalidExponent(f64),

    #[error("exponents violate the scaling relation: {0}")]
    InvalidExponents(String),

    #[error("only {samples} samples in the window, need at least {needed}")]
    InsufficientData { samples: usize, needed: usize },

    #[error("Picard map is not contracting (ratios {ratios:?})")]
    NoContraction { ratios: Vec<f64> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
