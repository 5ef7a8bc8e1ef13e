//! Numerical toolkit for the 1D nonlocal operator
//!
//! ```text
//! P v(t) = P.V. ∫ (v(t) - v(τ)) K(t - τ) dτ,
//! K(t)   = γ e^{-(n+2s)|t|/2} ₂F₁((n+2s)/2, 1+s; n/2; e^{-2|t|}),
//! ```
//!
//! the cylindrical reduction of the fractional Laplacian acting on radial
//! powers `|x|^{-(n-2s)/2} v(-log|x|)`. The crate provides:
//!
//! - [`specfun`]: self-contained log-gamma and Gauss hypergeometric
//!   evaluators with connection formulas at `z → 1`.
//! - [`kernel`]: problem constants and the kernel evaluator `K(t)` with its
//!   small-`t` and large-`t` asymptotic normalizations.
//! - [`operator`]: pointwise principal-value application of `P`, the periodic
//!   Fourier symbol `θ(k)`, Galerkin matrices of the quadratic form on
//!   intervals, and the n-dimensional radial oracle that calibrates the
//!   kernel normalization `γ`.
//! - [`spectral`]: first eigenvalue `λ₁(M)` on `[-M, M]`, the pure-power
//!   comparison eigenvalue, and negative-eigenvalue (Morse) counting.
//! - [`solver`]: bifurcation period detection and Newton continuation of
//!   periodic solutions of `P v + v = v^p` in Fourier space.
//! - [`verify`]: executable checks of the qualitative theory: intersection
//!   with the constant solution, the oscillation condition, truncated-`|v'|`
//!   negative directions with certified bounds, and translated-family
//!   Morse-index lower bounds.

pub mod error;
pub mod kernel;
pub mod operator;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{GammaMode, KernelModel, ProblemParams};
pub use operator::{GridForm, GridProfile, KernelKind, PeriodicProfile, PeriodicSymbol, Profile};
pub use solver::BranchPoint;
pub use spectral::{EigenResult, MorseCount};
pub use verify::{IndexReport, NegativeDirection, OscillationCertificate};
