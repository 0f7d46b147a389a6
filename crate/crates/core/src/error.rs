use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain is not star-shaped about its center: {0}")]
    NotStarShaped(String),
    #[error("degenerate boundary: |grad rho| = {grad:.3e} at ({x:.6}, {y:.6})")]
    DegenerateBoundary { grad: f64, x: f64, y: f64 },
    #[error("boundary root not bracketed along ray at angle {angle:.6}")]
    RootFindFailure { angle: f64 },
    #[error("length mismatch: {values} values for {points} points")]
    LengthMismatch { values: usize, points: usize },
    #[error("empty quadrature")]
    EmptyQuadrature,
    #[error("jets live at different base points")]
    BasePointMismatch,
    #[error("jet orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("jet order exhausted")]
    OrderExhausted,
    #[error("series argument {0:e} outside the region of convergence")]
    OutsideConvergence(f64),
    #[error("outer series has {have} coefficients, need {need}")]
    SeriesTooShort { have: usize, need: usize },
    #[error("kernel source and target coincide")]
    SourceTargetCoincide,
    #[error("polynomial degree {0} exceeds cap {1}")]
    DegreeCap(usize, usize),
    #[error("ill-conditioned fit: boundary residual {residual:.3e} above tolerance {tol:.3e}")]
    IllConditioned { residual: f64, tol: f64 },
    #[error("incompatible boundary flux {flux:.6e} (tolerance {tol:.3e})")]
    IncompatibleFlux { flux: f64, tol: f64 },
    #[error("source term has nonzero mean: integral {integral:.6e}, boundary flux {flux:.6e}")]
    NonzeroMean { integral: f64, flux: f64 },
    #[error("{quantity} {value:.3e} above tolerance {tol:.3e}")]
    ToleranceViolation { quantity: String, value: f64, tol: f64 },
    #[error("table truncated at total order {have}, need {need}")]
    TruncationTooSmall { have: usize, need: usize },
    #[error("certification needs total order >= {need}, table has {have}")]
    InsufficientOrders { have: usize, need: usize },
    #[error("empty derivative table")]
    EmptyTable,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
