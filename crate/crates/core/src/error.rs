//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violate the standing assumption n > 2s, s ∈ (0,1).
    #[error("invalid parameter regime: n = {n}, s = {s} (need n > 2s, 0 < s < 1)")]
    InvalidRegime { n: u32, s: f64 },

    /// A series or quadrature stopped before reaching its tolerance. Carries
    /// the partial value and an estimate of the remaining error.
    #[error("accuracy target missed: partial value {partial:e}, error bound {bound:e}")]
    Accuracy { partial: f64, bound: f64 },

    /// Kernel evaluated at its singular point t = 0.
    #[error("kernel is singular at t = 0")]
    Singularity,

    /// Grid too coarse for the requested operation.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Profile evaluated outside its representable range.
    #[error("extrapolation error: t = {t} outside representable range [{lo}, {hi}]")]
    Extrapolation { t: f64, lo: f64, hi: f64 },

    /// Iterative eigensolver or Newton iteration failed to converge.
    #[error("no convergence after {iters} iterations (residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },

    /// The symbol never reached the linearization level on the searched range.
    #[error("no bifurcation: symbol stays below {target} on the searched range")]
    NoBifurcation { target: f64 },

    /// Newton continuation step rejected.
    #[error("continuation step too large at L = {period}: {message}")]
    ContinuationStep { period: f64, message: String },

    /// Solution lost positivity during iteration.
    #[error("positivity failure: min v = {min_v:e} during iteration")]
    Positivity { min_v: f64 },

    /// Calibration battery produced an inconsistent ratio spread.
    #[error("calibration failure: ratio spread {spread:.3e} exceeds 5%")]
    Calibration { spread: f64 },

    /// An oscillation certificate was too generous for the direction build.
    #[error("certificate inconsistency: {0}")]
    CertificateInconsistency(String),

    /// IO or formatting error from table/manifest export.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
