use thiserror::Error;

/// Errors raised by calibration, sampling and the application runners.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested mechanism cannot provide the requested guarantee.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Bisection endpoints do not bracket a sign change.
    #[error("bracket error: f({lo}) = {f_lo}, f({hi}) = {f_hi}; need f(lo) <= 0 <= f(hi)")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// An iterative routine hit its iteration cap.
    #[error("no convergence after {iterations} iterations (bracket width {width:e})")]
    Convergence { iterations: usize, width: f64 },

    /// A function returned NaN or an infinity where a finite value was needed.
    #[error("non-finite value {value} at x = {at}")]
    NotFinite { at: f64, value: f64 },

    #[error("mechanism mismatch: expected {expected}, found {found}")]
    MechanismMismatch { expected: String, found: String },

    /// A coordinate with positive sensitivity received zero noise.
    #[error("coordinate {coordinate} has sensitivity {lambda} but zero noise scale; privacy loss is unbounded")]
    InfiniteLoss { coordinate: usize, lambda: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
