//! Fourier symbol of `P` on periodic functions.
//!
//! On a period-`L` cosine basis the operator is diagonal with multiplier
//!
//! ```text
//! θ(k) = ∫_ℝ (1 - cos kξ) K(ξ) dξ,   k_m = 2πm/L,
//! ```
//!
//! with `θ(0) = 0`, `θ` even and strictly increasing in |k| (kernel
//! positivity), and `θ(k) ~ A0 C_s k^{2s}` at large `k` where
//! `C_s = ∫ (1-cos w)|w|^{-1-2s} dw = 1/c_{1,s}`.

use crate::error::Result;
use crate::kernel::KernelModel;
use crate::quad::{self, QuadOpts};
use crate::specfun;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Head interval for the analytic pure-power treatment of the singularity.
const HEAD_MAX: f64 = 0.01;
/// Start of the exponential-series tail treatment.
const TAIL_FROM: f64 = 2.0;

/// Diagonal representation of `P` on a period-`L` frequency grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicSymbol {
    pub period: f64,
    /// θ(k_m) for m = 0..=n_modes.
    pub theta: Vec<f64>,
}

impl PeriodicSymbol {
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.period
    }

    pub fn value(&self, m: usize) -> f64 {
        self.theta[m]
    }

    pub fn n_modes(&self) -> usize {
        self.theta.len() - 1
    }
}

/// θ(k_m) for m = 0..=n_modes by adaptive quadrature; θ(0) = 0 exactly.
pub fn periodic_symbol(kernel: &KernelModel, period: f64, n_modes: usize) -> Result<PeriodicSymbol> {
    assert!(period > 0.0 && n_modes >= 1);
    let theta: Result<Vec<f64>> = (0..=n_modes)
        .into_par_iter()
        .map(|m| symbol_value(kernel, 2.0 * std::f64::consts::PI * m as f64 / period))
        .collect();
    Ok(PeriodicSymbol {
        period,
        theta: theta?,
    })
}

/// Single symbol value `θ(k)`.
pub fn symbol_value(kernel: &KernelModel, k: f64) -> Result<f64> {
    let k = k.abs();
    if k == 0.0 {
        return Ok(0.0);
    }
    let s = kernel.params.s;
    let a0 = kernel.a0;

    // Head [0, δ]: 1 - cos kξ expanded termwise against the pure-power part
    // (kδ ≤ π/8 keeps the alternating series rapid), bounded remainder by
    // a short adaptive rule.
    let delta = HEAD_MAX.min(std::f64::consts::PI / (8.0 * k));
    let mut head_pp = 0.0;
    let mut k2m = 1.0;
    let mut fact = 1.0;
    for m in 1..40 {
        let mf = m as f64;
        k2m *= k * k;
        fact *= (2.0 * mf - 1.0) * (2.0 * mf);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * k2m / fact * delta.powf(2.0 * mf - 2.0 * s) / (2.0 * mf - 2.0 * s);
        head_pp += term;
        if term.abs() < 1e-18 * head_pp.abs() {
            break;
        }
    }
    head_pp *= a0;
    let head_rem = quad::adaptive(
        |xi| {
            let diff = kernel.eval(xi).unwrap_or(0.0) - kernel.eval_pure_power(xi).unwrap_or(0.0);
            (1.0 - (k * xi).cos()) * diff
        },
        0.0,
        delta,
        QuadOpts {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_subdiv: 400,
        },
    )?;

    // Mid [δ, 2]: adaptive with breakpoints on the oscillation scale.
    let mut breaks = vec![delta];
    let osc = std::f64::consts::PI / k;
    let mut x = (delta / osc).floor() * osc + osc;
    let mut guard = 0;
    while x < TAIL_FROM && guard < 4000 {
        if x > delta {
            breaks.push(x);
        }
        x += osc.max((TAIL_FROM - delta) / 4000.0);
        guard += 1;
    }
    breaks.push(TAIL_FROM);
    let mid = quad::adaptive_segmented(
        |xi| (1.0 - (k * xi).cos()) * kernel.eval(xi).unwrap_or(0.0),
        &breaks,
        QuadOpts {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdiv: 6000,
        },
    )?;

    // Tail [2, ∞): K = γ Σ_j f_j e^{-β_j ξ} with β_j = (n+2s)/2 + 2j, and
    // ∫_A^∞ e^{-βξ}(1-cos kξ) dξ in closed form.
    let (a, b, c) = kernel.params.hyp_params();
    let alpha = kernel.params.exp_rate();
    let gamma = kernel.params.gamma_ns;
    let coeffs = specfun::gauss_series_coefficients(a, b, c, 40);
    let (sin_ka, cos_ka) = (k * TAIL_FROM).sin_cos();
    let mut tail = 0.0;
    for (j, f) in coeffs.iter().enumerate() {
        let beta = alpha + 2.0 * j as f64;
        let e = (-beta * TAIL_FROM).exp();
        let term = f * e * (1.0 / beta - (beta * cos_ka - k * sin_ka) / (beta * beta + k * k));
        tail += term;
        if term.abs() < 1e-18 * tail.abs().max(1e-300) {
            break;
        }
    }
    tail *= gamma;

    Ok(2.0 * (head_pp + head_rem + mid + tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{fractional_laplacian_constant, ProblemParams};

    fn sinh_kernel() -> KernelModel {
        let params = ProblemParams::with_unit_gamma(3, 0.5)
            .unwrap()
            .with_gamma(2.0);
        KernelModel::new(params).unwrap()
    }

    #[test]
    fn sinh_case_closed_form() {
        // θ(k) = (πk/2) coth(πk/2) - 1 for K = 1/(2 sinh²ξ).
        let kernel = sinh_kernel();
        for k in [0.2, 0.9, 1.7, 4.0, 11.0, 47.0, 260.0] {
            let x = 0.5 * std::f64::consts::PI * k;
            let want = x / x.tanh() - 1.0;
            let got = symbol_value(&kernel, k).unwrap();
            assert!(
                (got - want).abs() < 1e-9 * want.max(1.0),
                "k={k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn zero_frequency_is_exactly_zero() {
        let kernel = sinh_kernel();
        assert_eq!(symbol_value(&kernel, 0.0).unwrap(), 0.0);
        let sym = periodic_symbol(&kernel, 5.0, 8).unwrap();
        assert_eq!(sym.value(0), 0.0);
    }

    #[test]
    fn symbol_monotone_in_k() {
        for (n, s) in [(3u32, 0.25), (4, 0.75), (2, 0.5)] {
            let params = ProblemParams::with_unit_gamma(n, s).unwrap();
            let kernel = KernelModel::new(params).unwrap();
            let ks = [0.1, 0.5, 1.0, 2.0, 5.0, 12.0, 40.0];
            let vals: Vec<f64> = ks
                .iter()
                .map(|&k| symbol_value(&kernel, k).unwrap())
                .collect();
            for w in vals.windows(2) {
                assert!(w[1] > w[0], "(n={n},s={s}) not monotone: {vals:?}");
            }
        }
    }

    #[test]
    fn large_k_growth_matches_pure_power_constant() {
        // θ(k)/k^{2s} → A0 / c_{1,s}; the bounded kernel remainder decays
        // like k^{-2s}, so compare at two scales.
        for (n, s) in [(3u32, 0.5), (4, 0.75), (3, 0.25)] {
            let params = ProblemParams::with_unit_gamma(n, s).unwrap();
            let kernel = KernelModel::new(params).unwrap();
            let c_pp = kernel.a0 / fractional_laplacian_constant(1, s).unwrap();
            let ratio = |k: f64| symbol_value(&kernel, k).unwrap() / (c_pp * k.powf(2.0 * s));
            let r1 = ratio(50.0);
            let r2 = ratio(1500.0);
            assert!(
                (r2 - 1.0).abs() < (r1 - 1.0).abs(),
                "(n={n},s={s}) no approach: {r1} vs {r2}"
            );
            assert!((r2 - 1.0).abs() < 0.05, "(n={n},s={s}): {r2}");
        }
    }

    #[test]
    fn small_k_quadratic_regime() {
        // θ(k) ≈ (k²/2) ∫ ξ² K dξ(one-sided doubled) for small k.
        let kernel = sinh_kernel();
        // ∫_ℝ ξ² /(2 sinh²ξ) dξ = π²/6.
        let second_moment = std::f64::consts::PI.powi(2) / 6.0;
        let k = 1e-3;
        let got = symbol_value(&kernel, k).unwrap();
        let want = 0.5 * k * k * second_moment;
        assert!((got - want).abs() < 1e-4 * want, "got {got}, want {want}");
    }
}
