use thiserror::Error;

/// Errors shared across the solver and diagnostics modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: non-finite sample at index {index}")]
    NonFiniteInput { index: usize },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("grid resolution must be an even integer >= 8, got {n}")]
    BadGrid { n: usize },

    #[error("grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid norm request: {reason}")]
    BadNormRequest { reason: String },

    #[error("convexity violated at y = {y}: f''(y) = {observed} < sigma = {sigma}")]
    Convexity { y: f64, observed: f64, sigma: f64 },

    #[error("growth hypothesis violated: fitted |f'| exponent {h1_fit} >= 2")]
    Growth { h1_fit: f64 },

    #[error("flux derivative mismatch at y = {y}: supplied {supplied}, finite-difference {estimated}")]
    DerivativeMismatch { y: f64, supplied: f64, estimated: f64 },

    #[error("initial data is identically zero; D is undefined")]
    DegenerateInitialData,

    #[error("shift {ell} is not an integer multiple of dx = {dx}")]
    LatticeShift { ell: f64, dx: f64 },

    #[error("flatness undefined: S_2(ell) = 0")]
    DegenerateFlatness,

    #[error("time window [{t1}, {t2}] not covered by the run (t_end = {t_end})")]
    WindowNotCovered { t1: f64, t2: f64, t_end: f64 },

    #[error("grid under-resolves the dissipation scale: dx = {dx} > {required} = c_res * nu^beta")]
    ResolutionInadequate { dx: f64, required: f64 },

    #[error("unsupported scaling target: {0}")]
    UnsupportedTarget(String),

    #[error("log-log fit requires positive values, got ({x}, {y})")]
    LogDomain { x: f64, y: f64 },

    #[error("log-log fit needs at least 3 points with strictly monotone x")]
    FitUnderdetermined,

    #[error("config error for key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
