use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval ({a}, {b}): left endpoint must be below right endpoint")]
    InvalidInterval { a: f64, b: f64 },
    #[error("intervals ({0}, {1}) and ({2}, {3}) overlap")]
    OverlappingIntervals(f64, f64, f64, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain has no minus/plus classification")]
    MissingClassification,
    #[error("classification has {tags} tags for {intervals} intervals")]
    ClassificationLength { tags: usize, intervals: usize },
    #[error("minus part of the domain is empty")]
    EmptyMinus,
    #[error("fractional Laplacian kernel only implemented for dimension 1, got {0}")]
    UnsupportedDimension(u32),
    #[error("point {x} lies inside [{a}, {b}]")]
    PointInsideInterval { a: f64, b: f64, x: f64 },
    #[error("Poisson kernel arguments outside support")]
    ArgumentsOutsideSupport,
    #[error("mesh width {h} too coarse for shortest interval of length {shortest}")]
    MeshTooCoarse { h: f64, shortest: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("principal eigenvector has a non-positive entry")]
    NonPositiveEigenvector,
    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,
    #[error("grids do not form a refinement pair: {0}")]
    GridMismatch(String),
    #[error("monotone iteration lost monotonicity at iteration {0}")]
    NonMonotoneStep(usize),
    #[error("time march left the invariant region at t = {0}")]
    Blowup(f64),
    #[error("time march reached t_end without settling")]
    NotSettled,
    #[error("ordering violated at t = {t} by {excess}")]
    OrderViolation { t: f64, excess: f64 },
    #[error("no interior samples for the envelope ratio")]
    NoInteriorSamples,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("monotonicity violated at mu = {mu}: {prev} -> {next}")]
    MonotonicityViolation { mu: f64, prev: f64, next: f64 },
    #[error("target {target} outside admissible range [{lo}, {hi}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no sign change of lambda over the scanned range")]
    NoSignChange,
    #[error("figure {figure}: {detail}")]
    OutcomeMismatch { figure: String, detail: String },
    #[error("configuration error: {0}")]
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
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
