//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide error enumeration.
///
/// Numerical routines report failure modes explicitly instead of saturating
/// or returning sentinel values: an overflowing symbol evaluation, an
/// exhausted quadrature depth budget, or a diverging simulation all surface
/// as distinct variants so callers can react (and tests can assert on them).
#[derive(Debug, Error)]
pub enum CoreError {
    /// A symbol with a negative power-law factor was evaluated at r = 0.
    #[error("symbol is singular at the origin: {0}")]
    SingularAtOrigin(String),

    /// A symbol evaluation left the representable f64 range.
    #[error("overflow evaluating {what} at r = {r:e}")]
    Overflow { what: String, r: f64 },

    /// A quotient symbol hit a zero denominator.
    #[error("division by zero evaluating {what} at r = {r:e}")]
    DivisionByZero { what: String, r: f64 },

    /// A suite violates a structural invariant (signs, monotonicity, ranges).
    #[error("invalid multiplier suite: {0}")]
    InvalidSuite(String),

    /// The radial grid does not reach far enough for a class verdict.
    #[error("grid too small: r_max = {0:e} < 1e6")]
    GridTooSmall(f64),

    /// Adaptive quadrature exceeded its refinement depth budget.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// An integrand is undefined somewhere on the integration interval.
    #[error("singular integrand: {0}")]
    SingularIntegrand(String),

    /// Physical-sample array does not match the grid.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An operation requiring a zero-mean field received one with k = 0 content.
    #[error("zero mode undefined: {0}")]
    ZeroModeUndefined(String),

    /// A Littlewood-Paley partition cannot cover the requested grid.
    #[error("dyadic range too narrow: {0}")]
    RangeTooNarrow(String),

    /// A dyadic block holds no energy, so no ratio can be formed.
    #[error("empty Littlewood-Paley block at j = {0}")]
    EmptyBlock(i32),

    /// Automatic step selection could not produce a usable dt.
    #[error("CFL violation: {0}")]
    CflViolation(String),

    /// A tracked norm became NaN or infinite during integration.
    #[error("blowup at t = {t}: {what}")]
    Blowup { t: f64, what: String },

    /// A probe input that must be annulus-supported is not.
    #[error("spectral localization violated: {0}")]
    LocalizationViolated(String),

    /// Snapshot or report file content is malformed.
    #[error("file format error: {0}")]
    FileFormat(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
