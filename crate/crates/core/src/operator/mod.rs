//! Discretizations of the nonlocal operator `P`.
//!
//! Four views of the same operator, each with an independent numerical path:
//!
//! - [`pointwise`]: principal-value evaluation of `P v(t)` through the
//!   symmetrized second difference (the only form used anywhere; the
//!   non-integrable part of the kernel never appears).
//! - [`symbol`]: the Fourier multiplier `θ(k) = ∫ (1-cos kξ) K(ξ) dξ` that
//!   diagonalizes `P` on periodic functions.
//! - [`gridform`]: Galerkin matrices of the quadratic form
//!   `𝒯(φ) = ½ ∬ K(t-τ)(φ(t)-φ(τ))² dt dτ` on piecewise-linear elements
//!   supported in `[-M, M]`, plus mass and potential matrices.
//! - [`calibrate`]: the n-dimensional radial quadrature oracle for
//!   `(-Δ)^s` that pins down the kernel normalization `γ`.

mod calibrate;
mod gridform;
mod pointwise;
mod profile;
mod symbol;

pub use calibrate::{
    calibrate_gamma, CalibrationReport, CalibrationSample, OracleResolution, RadialOracle,
};
pub use gridform::{assemble_grid_form, assemble_grid_form_at, FormMeta, GridForm, KernelKind};
pub use pointwise::{apply_p_pointwise, PointwiseP};
pub use profile::{GridProfile, PeriodicProfile, Profile};
pub use symbol::{periodic_symbol, symbol_value, PeriodicSymbol};
