use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("determinant {det} deviates from 1 beyond tolerance {tolerance}")]
    DeterminantDrift { det: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid chamber vector: {0}")]
    InvalidChamber(String),

    #[error("root value {value} exceeds the exp overflow guard {guard}")]
    Overflow { value: f64, guard: f64 },

    #[error("exponent d = {d} is not admissible (need 2d > dim a + 2r); smallest admissible d exceeds {min_d}")]
    DivergentExponent { d: f64, min_d: f64 },

    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interpolation out of range: {0}")]
    InterpolationOutOfRange(String),

    #[error("boundary grids do not match")]
    GridMismatch,

    #[error("ball exceeds the element cap of {cap}")]
    BallOverflow { cap: usize },

    #[error("floating-point key collision between elements {first} and {second}")]
    KeyCollision { first: usize, second: usize },

    #[error("integer overflow while multiplying group elements")]
    IntegerOverflow,

    #[error(
        "target ball of radius {target} cannot hold a product of supports with radius {needed}"
    )]
    TargetTooSmall { target: u32, needed: u32 },

    #[error("balls come from different presentations: {0} vs {1}")]
    PresentationMismatch(String, String),

    #[error("inverse of element {0} lies outside the ball")]
    SupportNotSymmetric(usize),

    #[error("function takes a negative or non-real value at element {0}")]
    NegativeMass(usize),

    #[error("power iteration stalled with residual {residual} (estimate {estimate})")]
    PowerIterationStall { estimate: f64, residual: f64 },

    #[error("radial function support {support} exceeds the chamber cutoff {cutoff}")]
    CutoffTooSmall { support: f64, cutoff: f64 },

    #[error("neighbourhood translates overlap: minimal separation {separation} <= {required}")]
    OverlapDetected { separation: f64, required: f64 },

    #[error("Harish-Chandra function underflows at element {0}")]
    XiUnderflow(usize),

    #[error("unknown group presentation '{0}'")]
    UnknownPresentation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
