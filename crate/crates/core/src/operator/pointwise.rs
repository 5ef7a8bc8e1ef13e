//! Pointwise principal-value application of `P`.
//!
//! Only the symmetrized second-difference form is ever integrated:
//!
//! ```text
//! P v(t) = -∫_0^∞ (v(t+ξ) + v(t-ξ) - 2 v(t)) K(ξ) dξ,
//! ```
//!
//! which removes the non-integrable `|ξ|^{-1-2s}` part analytically. Near
//! ξ = 0 the second difference is replaced by its Taylor expansion against
//! precomputed kernel moments; the far field is truncated where the
//! exponential tail falls below tolerance (grid profiles contribute their
//! far-field constant in closed form beyond the last node).

use super::profile::Profile;
use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::quad::{self, QuadOpts};

/// Local accuracy target of a single application.
const DEFAULT_TOL: f64 = 1e-9;

/// Reusable evaluation engine; precomputes the near-origin kernel moments.
pub struct PointwiseP<'k> {
    kernel: &'k KernelModel,
    delta: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    tol: f64,
}

impl<'k> PointwiseP<'k> {
    pub fn new(kernel: &'k KernelModel) -> Result<Self> {
        Self::with_delta(kernel, 1e-3)
    }

    /// `delta` is the Taylor-head radius; callers evaluating spline profiles
    /// shrink it below half the node spacing so at most the knot at `t`
    /// itself contributes a third-order term.
    pub fn with_delta(kernel: &'k KernelModel, delta: f64) -> Result<Self> {
        let delta = delta.clamp(1e-8, 1e-3);
        Ok(PointwiseP {
            kernel,
            delta,
            m2: kernel.local_moment(delta, 2)?,
            m3: kernel.local_moment(delta, 3)?,
            m4: kernel.local_moment(delta, 4)?,
            tol: DEFAULT_TOL,
        })
    }

    pub fn for_profile(kernel: &'k KernelModel, profile: &Profile) -> Result<Self> {
        let delta = match profile {
            Profile::Periodic(_) => 1e-3,
            Profile::Grid(g) => (0.5 * g.min_spacing()).min(1e-3),
        };
        Self::with_delta(kernel, delta)
    }

    /// `P v(t)` for a profile.
    pub fn apply(&self, profile: &Profile, t: f64) -> Result<f64> {
        let (lo, hi) = profile.core_range();
        if t < lo || t > hi {
            return Err(Error::Extrapolation { t, lo, hi });
        }
        let (d3_left, d3_right) = match profile {
            Profile::Grid(g) => g.deriv3_sides(t),
            Profile::Periodic(_) => (0.0, 0.0),
        };
        let d4 = match profile {
            Profile::Periodic(p) => p.derivative(t, 4),
            Profile::Grid(_) => 0.0,
        };
        let far = match profile {
            Profile::Grid(g) => Some((g.far_value, (t - lo).max(hi - t))),
            Profile::Periodic(_) => None,
        };
        self.apply_parts(
            &|x| profile.eval(x),
            t,
            profile.deriv2(t),
            d3_right - d3_left,
            d4,
            profile.sup_bound(),
            far,
        )
    }

    /// Core routine shared with the calibration battery (analytic bumps).
    ///
    /// `d3_jump` is the jump of the third derivative at `t` (zero for smooth
    /// profiles); `far` is `(v_∞, reach)` meaning `v ≡ v_∞` beyond distance
    /// `reach` from `t`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn apply_parts(
        &self,
        v: &dyn Fn(f64) -> f64,
        t: f64,
        d2: f64,
        d3_jump: f64,
        d4: f64,
        sup: f64,
        far: Option<(f64, f64)>,
    ) -> Result<f64> {
        let vt = v(t);
        // Taylor head: v(t+ξ)+v(t-ξ)-2v(t) = d2 ξ² + (Δv''') ξ³/6 + d4 ξ⁴/12.
        let head = d2 * self.m2 + d3_jump / 6.0 * self.m3 + d4 / 12.0 * self.m4;

        // Far-field cutoff: beyond r_cut the contribution is below tol.
        let alpha = self.kernel.params.exp_rate();
        let bound = 4.0 * sup.max(1.0);
        let mut r_cut = ((bound / (0.01 * self.tol)).ln() / alpha).max(4.0 * self.delta);
        let mut tail = 0.0;
        if let Some((v_inf, reach)) = far {
            if reach < r_cut {
                // Both sides constant beyond `reach`.
                tail = 2.0 * (v_inf - vt) * self.kernel.tail_mass_one_sided(reach)?;
                r_cut = reach;
            }
        }

        let mid = if r_cut > self.delta {
            quad::adaptive(
                |xi| (v(t + xi) + v(t - xi) - 2.0 * vt) * self.kernel.eval(xi).unwrap_or(0.0),
                self.delta,
                r_cut,
                QuadOpts {
                    rel_tol: 1e-10,
                    abs_tol: 0.1 * self.tol,
                    max_subdiv: 4000,
                },
            )?
        } else {
            0.0
        };

        Ok(-(head + mid + tail))
    }
}

/// One-shot evaluation of `P v(t)`.
pub fn apply_p_pointwise(kernel: &KernelModel, profile: &Profile, t: f64) -> Result<f64> {
    PointwiseP::for_profile(kernel, profile)?.apply(profile, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ProblemParams;
    use crate::operator::profile::{GridProfile, PeriodicProfile};

    fn sinh_kernel() -> KernelModel {
        let params = ProblemParams::with_unit_gamma(3, 0.5)
            .unwrap()
            .with_gamma(2.0);
        KernelModel::new(params).unwrap()
    }

    #[test]
    fn constant_profile_maps_to_zero() {
        let kernel = sinh_kernel();
        let one = Profile::constant(1.0);
        for t in [-3.0, 0.0, 1.7] {
            let val = apply_p_pointwise(&kernel, &one, t).unwrap();
            assert!(val.abs() <= 1e-10, "P(1)({t}) = {val}");
        }
    }

    #[test]
    fn cosine_matches_closed_form_symbol() {
        // For (n,s) = (3,1/2), θ(k) = (πk/2) coth(πk/2) - 1 and
        // P cos(k·)(t) = θ(k) cos(kt).
        let kernel = sinh_kernel();
        let period = 5.0;
        let k = 2.0 * std::f64::consts::PI / period;
        let profile = Profile::Periodic(PeriodicProfile::new(period, vec![0.0, 1.0]).unwrap());
        let x = 0.5 * std::f64::consts::PI * k;
        let theta = x / x.tanh() - 1.0;
        let engine = PointwiseP::new(&kernel).unwrap();
        for t in [0.0, 0.3, 1.2, 2.5] {
            let got = engine.apply(&profile, t).unwrap();
            let want = theta * (k * t).cos();
            assert!(
                (got - want).abs() < 1e-7 * theta.max(1.0),
                "t={t}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn grid_profile_with_far_field() {
        // A compact bump sampled on a grid, P evaluated at its center, must
        // match the same bump evaluated analytically through apply_parts.
        let kernel = sinh_kernel();
        let bump = |t: f64| 1.0 + 0.5 * (-t * t).exp();
        let grid = GridProfile::from_fn(-14.0, 14.0, 2801, bump, 1.0).unwrap();
        let profile = Profile::Grid(grid);
        let engine = PointwiseP::for_profile(&kernel, &profile).unwrap();
        let got = engine.apply(&profile, 0.4).unwrap();

        let t = 0.4;
        let d2 = {
            let g = |x: f64| 0.5 * (-x * x).exp();
            // (1 + g)'' = g'' = g (4x² - 2)
            g(t) * (4.0 * t * t - 2.0)
        };
        let d4 = {
            let g = |x: f64| 0.5 * (-x * x).exp();
            g(t) * (16.0 * t.powi(4) - 48.0 * t * t + 12.0)
        };
        let analytic_engine = PointwiseP::new(&kernel).unwrap();
        let want = analytic_engine
            .apply_parts(&bump, t, d2, 0.0, d4, 1.5, Some((1.0, 13.0)))
            .unwrap();
        assert!(
            (got - want).abs() < 1e-6,
            "grid {got} vs analytic {want}"
        );
    }

    #[test]
    fn extrapolation_error_outside_grid() {
        let kernel = sinh_kernel();
        let grid = GridProfile::from_fn(-2.0, 2.0, 101, |_| 1.0, 1.0).unwrap();
        let profile = Profile::Grid(grid);
        assert!(matches!(
            apply_p_pointwise(&kernel, &profile, 3.0),
            Err(Error::Extrapolation { .. })
        ));
    }

    #[test]
    fn vanishing_point_of_nonnegative_profile_is_negative() {
        // Maximum-principle computation: w ≥ 0, w(t0) = 0 forces P w(t0) < 0.
        let kernel = sinh_kernel();
        let w = |t: f64| (t - 0.3).powi(2) / (1.0 + (t - 0.3).powi(2));
        let grid = GridProfile::from_fn(-12.0, 12.0, 1601, w, w(12.0)).unwrap();
        let profile = Profile::Grid(grid);
        let val = apply_p_pointwise(&kernel, &profile, 0.3).unwrap();
        assert!(val < -1e-3, "P w(t0) = {val} not negative");
    }
}
