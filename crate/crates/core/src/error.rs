use thiserror::Error;

pub type Result<T> = std::result::Result<T, GjmsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GjmsError {
    #[error("invalid dimension pair (n={n}, k={k}): {reason}")]
    InvalidDims { n: usize, k: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("chart pole: point is antipodal to the chart center")]
    ChartPole,

    #[error("inversion pole hit at stage {stage}")]
    InversionPole { stage: usize },

    #[error("kernel singularity: points closer than {threshold:e} (distance {distance:e})")]
    Singularity { distance: f64, threshold: f64 },

    #[error("non-free action: {0}")]
    NonFreeAction(String),

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("metric undefined: mass {mass:e} is not positive")]
    MetricUndefined { mass: f64 },

    #[error("conformal factor must be positive, got {0:e}")]
    NonPositiveFactor(f64),

    #[error("stencil leaves the field domain at {0:?}")]
    OutOfDomain(Vec<f64>),

    #[error("test function support touches the integration box boundary")]
    SupportTouchesBoundary,

    #[error("vanishing test function value at the evaluation point")]
    VanishingTestFunction,

    #[error("blow-up radius {rho:e} is below the profile's exterior bound {rho_min:e}")]
    InsideSingularRegion { rho: f64, rho_min: f64 },

    #[error("unsupported order: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
