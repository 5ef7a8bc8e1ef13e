//! Periodic solutions of `P v + v = v^p` by Fourier collocation.
//!
//! The constant solution `v ≡ 1` loses stability where the symbol crosses
//! the linearization level: `θ(2π/L*) = p - 1`. Nonconstant even periodic
//! solutions bifurcate there and are continued in the period `L` by damped
//! Newton iteration on cosine coefficients. Evenness (`v'(0) = 0`) fixes
//! the translation phase, so the Jacobian is nonsingular away from the
//! bifurcation point; the nonlinearity is evaluated by collocation on a
//! 4x-oversampled grid (the non-polynomial power `v^p` is not band-limited).

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::operator::{periodic_symbol, symbol_value, PeriodicProfile, PeriodicSymbol};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Newton convergence target for the coefficient-space residual.
const NEWTON_TOL: f64 = 1e-12;
/// Contract bound on the collocation sup-norm residual of a returned point.
const RESIDUAL_BOUND: f64 = 1e-8;
const MAX_NEWTON_ITERS: usize = 60;

/// A converged point on a periodic branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchPoint {
    pub period: f64,
    pub profile: PeriodicProfile,
    /// Sup-norm of `P v + v - v^p` on a fine shifted collocation grid.
    pub residual: f64,
    /// `‖v - 1‖_∞` over one period.
    pub amplitude: f64,
    pub newton_iters: usize,
    pub min_v: f64,
    pub max_v: f64,
}

/// Initial guess for [`solve_periodic`].
#[derive(Debug, Clone)]
pub enum Seed {
    /// `v = 1 + a cos(2πt/L)` with second-order corrections; `a = 0` seeds
    /// the constant solution.
    Cosine(f64),
    /// Warm start from a previously converged point.
    Continuation(PeriodicProfile),
}

/// Bifurcation period `L* = 2π/k*` where `θ(k*) = p - 1 = 4s/(n-2s)`,
/// located by bisection on the monotone symbol to `|θ - (p-1)| ≤ 1e-10`.
pub fn bifurcation_period(kernel: &KernelModel) -> Result<f64> {
    let target = kernel.params.lin_coeff;
    let theta = |k: f64| symbol_value(kernel, k);
    let mut hi = 1.0;
    let mut guard = 0;
    while theta(hi)? < target {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NoBifurcation { target });
        }
    }
    let mut lo = hi / 2.0;
    while theta(lo)? > target {
        lo /= 2.0;
        guard += 1;
        if guard > 120 {
            return Err(Error::NoBifurcation { target });
        }
    }
    // Bisection with a final secant polish.
    let mut f_lo = theta(lo)? - target;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = theta(mid)? - target;
        if f_mid.abs() <= 1e-11 {
            return Ok(2.0 * std::f64::consts::PI / mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-15 * hi {
            break;
        }
    }
    let k_star = 0.5 * (lo + hi);
    if (theta(k_star)? - target).abs() > 1e-10 {
        return Err(Error::NonConvergence {
            iters: 200,
            residual: (theta(k_star)? - target).abs(),
        });
    }
    Ok(2.0 * std::f64::consts::PI / k_star)
}

/// Cosine collocation workspace: modes 0..=N on a 4N-point period grid.
struct Collocation {
    n_modes: usize,
    q: usize,
    /// cos(2π m q / Q) for m = 0..=2N, q = 0..Q.
    cos_table: Vec<f64>,
}

impl Collocation {
    fn new(n_modes: usize) -> Self {
        let q = 4 * n_modes;
        let mut cos_table = Vec::with_capacity((2 * n_modes + 1) * q);
        for m in 0..=2 * n_modes {
            for j in 0..q {
                let angle = 2.0 * std::f64::consts::PI * (m * j % q) as f64 / q as f64;
                cos_table.push(angle.cos());
            }
        }
        Collocation {
            n_modes,
            q,
            cos_table,
        }
    }

    fn cos(&self, m: usize, j: usize) -> f64 {
        self.cos_table[m * self.q + j]
    }

    fn values(&self, b: &[f64]) -> Vec<f64> {
        (0..self.q)
            .map(|j| {
                b.iter()
                    .enumerate()
                    .map(|(m, &bm)| bm * self.cos(m, j))
                    .sum()
            })
            .collect()
    }

    /// Cosine coefficients of sampled values, modes 0..=count.
    fn coeffs(&self, f: &[f64], count: usize) -> Vec<f64> {
        (0..=count)
            .map(|m| {
                let sum: f64 = f.iter().enumerate().map(|(j, &fj)| fj * self.cos(m, j)).sum();
                if m == 0 {
                    sum / self.q as f64
                } else {
                    2.0 * sum / self.q as f64
                }
            })
            .collect()
    }
}

struct NewtonProblem<'a> {
    coll: Collocation,
    symbol: &'a PeriodicSymbol,
    p: f64,
}

impl NewtonProblem<'_> {
    /// Coefficient-space residual `F_m = (θ_m + 1) b_m - (v^p)_m`; `None`
    /// when positivity fails at a collocation point.
    fn residual(&self, b: &[f64]) -> Option<DVector<f64>> {
        let v = self.coll.values(b);
        if v.iter().any(|&x| x <= 0.0) {
            return None;
        }
        let vp: Vec<f64> = v.iter().map(|&x| x.powf(self.p)).collect();
        let vp_hat = self.coll.coeffs(&vp, self.coll.n_modes);
        Some(DVector::from_fn(self.coll.n_modes + 1, |m, _| {
            (self.symbol.value(m) + 1.0) * b[m] - vp_hat[m]
        }))
    }

    /// Analytic Jacobian via the cosine product rule on `w = p v^{p-1}`.
    fn jacobian(&self, b: &[f64]) -> DMatrix<f64> {
        let n = self.coll.n_modes;
        let v = self.coll.values(b);
        let w: Vec<f64> = v.iter().map(|&x| self.p * x.powf(self.p - 1.0)).collect();
        let w_hat = self.coll.coeffs(&w, 2 * n);
        DMatrix::from_fn(n + 1, n + 1, |m, j| {
            let mult = if m == j { self.symbol.value(m) + 1.0 } else { 0.0 };
            // Projection of w·cos(k_j·) on cos(k_m·): the l = 0 term of w
            // enters the diagonal with full weight, everything else halves.
            let dm = match (m, j) {
                (0, 0) => w_hat[0],
                (0, j) => 0.5 * w_hat[j],
                (m, 0) => w_hat[m],
                (m, j) if m == j => w_hat[0] + 0.5 * w_hat[m + j],
                (m, j) => 0.5 * (w_hat[m.abs_diff(j)] + w_hat[m + j]),
            };
            mult - dm
        })
    }

    /// Sup-norm residual of the represented function on a fine shifted grid
    /// (independent of the collocation nodes).
    fn sup_residual(&self, b: &[f64]) -> f64 {
        let fine = 2 * self.coll.q;
        let period = self.symbol.period;
        let mut worst = 0.0f64;
        for j in 0..fine {
            let t = period * (j as f64 + 0.37) / fine as f64;
            let mut v = 0.0;
            let mut pv = 0.0;
            for (m, &bm) in b.iter().enumerate() {
                let c = (self.symbol.wavenumber(m) * t).cos();
                v += bm * c;
                pv += self.symbol.value(m) * bm * c;
            }
            worst = worst.max((pv + v - v.powf(self.p)).abs());
        }
        worst
    }
}

/// Newton iteration at fixed period `L`; see [`Seed`] for initialization.
///
/// Converged points satisfy `residual ≤ 1e-8` (sup norm on a fine grid) and
/// `min v > 0`. A seed aimed at the nonconstant branch that still lands on
/// `v ≡ 1` is retried with amplitudes scaled up from the local bifurcation
/// prediction before the constant point is accepted.
pub fn solve_periodic(
    kernel: &KernelModel,
    period: f64,
    n_modes: usize,
    seed: Seed,
) -> Result<BranchPoint> {
    if n_modes < 32 {
        return Err(Error::Resolution(format!(
            "need at least 32 modes, got {n_modes}"
        )));
    }
    let symbol = periodic_symbol(kernel, period, 2 * n_modes)?;
    let problem = NewtonProblem {
        coll: Collocation::new(n_modes),
        symbol: &symbol,
        p: kernel.params.p,
    };

    let attempts: Vec<Vec<f64>> = match &seed {
        Seed::Continuation(profile) => {
            let mut b = vec![0.0; n_modes + 1];
            for (m, &c) in profile.cosine.iter().enumerate().take(n_modes + 1) {
                b[m] = c;
            }
            vec![b]
        }
        Seed::Cosine(a) => {
            if *a == 0.0 {
                let mut b = vec![0.0; n_modes + 1];
                b[0] = 1.0;
                vec![b]
            } else {
                cosine_attempts(kernel, &symbol, *a, n_modes)
            }
        }
    };

    let mut last: Option<(Vec<f64>, usize)> = None;
    for b0 in &attempts {
        let (b, iters) = newton_iterate(&problem, b0.clone())?;
        let amplitude_proxy = b.iter().skip(1).map(|c| c.abs()).sum::<f64>();
        let wants_nonconstant = matches!(&seed, Seed::Cosine(a) if *a != 0.0);
        last = Some((b, iters));
        if !wants_nonconstant || amplitude_proxy > 1e-5 {
            break;
        }
    }
    let (b, newton_iters) = last.expect("at least one attempt");

    let residual = problem.sup_residual(&b);
    if residual > RESIDUAL_BOUND {
        return Err(Error::NonConvergence {
            iters: newton_iters,
            residual,
        });
    }
    let profile = PeriodicProfile::new(period, b)?;
    let (min_v, max_v) = profile.min_max(4 * n_modes);
    if min_v <= 0.0 {
        return Err(Error::Positivity { min_v });
    }
    Ok(BranchPoint {
        period,
        amplitude: (max_v - 1.0).abs().max((1.0 - min_v).abs()),
        residual,
        newton_iters,
        min_v,
        max_v,
        profile,
    })
}

/// Seed ladder for the nonconstant branch: the local amplitude equation
/// `θ(k) - (p-1) = G A²` predicts the branch amplitude near onset; start at
/// the larger of the request and the prediction and escalate.
fn cosine_attempts(
    kernel: &KernelModel,
    symbol: &PeriodicSymbol,
    a: f64,
    n_modes: usize,
) -> Vec<Vec<f64>> {
    let p = kernel.params.p;
    let theta1 = symbol.value(1);
    let theta2 = symbol.value(2);
    let mu = theta1 - (p - 1.0);
    let c2 = 0.5 * p * (p - 1.0);
    let c3 = p * (p - 1.0) * (p - 2.0) / 6.0;
    let g = -c2 * c2 / (p - 1.0) + c2 * c2 / (2.0 * (theta2 - (p - 1.0))) + 0.75 * c3;
    let predicted = if g < 0.0 && mu < 0.0 {
        (mu / g).sqrt()
    } else {
        f64::NAN
    };
    let base = if predicted.is_finite() {
        a.max(0.9 * predicted)
    } else {
        a
    };
    [1.0, 1.5, 2.25, 0.5]
        .iter()
        .map(|scale| {
            let amp = base * scale;
            let mut b = vec![0.0; n_modes + 1];
            b[0] = 1.0 - c2 * amp * amp / (2.0 * (p - 1.0));
            b[1] = amp;
            if n_modes >= 2 {
                b[2] = c2 * amp * amp / (2.0 * (theta2 - (p - 1.0)));
            }
            b
        })
        .collect()
}

fn newton_iterate(problem: &NewtonProblem, mut b: Vec<f64>) -> Result<(Vec<f64>, usize)> {
    let mut f = problem
        .residual(&b)
        .ok_or(Error::Positivity { min_v: 0.0 })?;
    for iter in 0..MAX_NEWTON_ITERS {
        let norm = f.amax();
        if norm < NEWTON_TOL {
            return Ok((b, iter));
        }
        let jac = problem.jacobian(&b);
        let delta = jac
            .lu()
            .solve(&(-&f))
            .ok_or(Error::NonConvergence {
                iters: iter,
                residual: norm,
            })?;
        // Damped update: halve on positivity loss or residual growth.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let trial: Vec<f64> = b
                .iter()
                .zip(delta.iter())
                .map(|(bi, di)| bi + step * di)
                .collect();
            if let Some(f_trial) = problem.residual(&trial) {
                if f_trial.amax() < norm || step < 1.0 {
                    b = trial;
                    f = f_trial;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Positivity { min_v: 0.0 });
        }
    }
    let norm = f.amax();
    if norm < NEWTON_TOL {
        Ok((b, MAX_NEWTON_ITERS))
    } else {
        Err(Error::NonConvergence {
            iters: MAX_NEWTON_ITERS,
            residual: norm,
        })
    }
}

/// Geometric continuation in the period from `l_start` to `l_end`; each
/// point warm-starts from the previous one.
pub fn continue_branch(
    kernel: &KernelModel,
    l_start: f64,
    l_end: f64,
    steps: usize,
    n_modes: usize,
) -> Result<Vec<BranchPoint>> {
    if steps == 0 {
        return Err(Error::Domain("continuation needs at least one step".into()));
    }
    let mut out: Vec<BranchPoint> = Vec::with_capacity(steps);
    for i in 0..steps {
        let frac = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
        let period = l_start * (l_end / l_start).powf(frac);
        let seed = match out.last() {
            None => Seed::Cosine(0.05),
            Some(prev) => Seed::Continuation(prev.profile.clone()),
        };
        let point = solve_periodic(kernel, period, n_modes, seed).map_err(|e| {
            Error::ContinuationStep {
                period,
                message: e.to_string(),
            }
        })?;
        out.push(point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ProblemParams;

    fn sinh_kernel() -> KernelModel {
        let params = ProblemParams::with_unit_gamma(3, 0.5)
            .unwrap()
            .with_gamma(2.0);
        KernelModel::new(params).unwrap()
    }

    #[test]
    fn bifurcation_period_sinh_case() {
        // θ(k) = (πk/2) coth(πk/2) - 1 crosses 1 at x coth x = 2.
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let k_star = 2.0 * std::f64::consts::PI / l_star;
        let x = 0.5 * std::f64::consts::PI * k_star;
        assert!((x / x.tanh() - 2.0).abs() < 1e-9, "x coth x = {}", x / x.tanh());
        assert!((5.1..5.2).contains(&l_star), "L* = {l_star}");
        // Defining equation holds to 1e-10.
        let theta = symbol_value(&kernel, k_star).unwrap();
        assert!((theta - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn bifurcation_period_decreases_in_s() {
        // Recorded from a sweep at n = 3 (monotonicity observed, not assumed).
        let mut prev = f64::INFINITY;
        for s in [0.25, 0.5, 0.75] {
            let params = ProblemParams::with_unit_gamma(3, s).unwrap();
            let kernel = KernelModel::new(params).unwrap();
            let l_star = bifurcation_period(&kernel).unwrap();
            assert!(l_star < prev, "L*({s}) = {l_star} not decreasing");
            prev = l_star;
        }
    }

    #[test]
    fn no_kernel_below_bifurcation_period() {
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let k = 2.0 * std::f64::consts::PI / (0.97 * l_star);
        let theta = symbol_value(&kernel, k).unwrap();
        assert!(theta - kernel.params.lin_coeff > 0.0);
    }

    #[test]
    fn zero_seed_returns_constant_solution() {
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let point = solve_periodic(&kernel, 1.2 * l_star, 32, Seed::Cosine(0.0)).unwrap();
        assert!(point.amplitude < 1e-12, "amplitude {}", point.amplitude);
        assert!(point.residual < 1e-12);
    }

    #[test]
    fn small_seed_reaches_nonconstant_branch() {
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let point = solve_periodic(&kernel, 1.05 * l_star, 64, Seed::Cosine(0.05)).unwrap();
        assert!(point.amplitude > 1e-3, "amplitude {}", point.amplitude);
        assert!(point.residual <= 1e-8, "residual {}", point.residual);
        assert!(point.min_v > 0.0);
        // Mean-value identity: the zero-mode residual contains ∫(v^p - v)/L.
        // It is bounded by the converged residual.
        assert!(point.residual * point.period < 1e-7);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let kernel = sinh_kernel();
        let period = 6.0;
        let n_modes = 32;
        let symbol = periodic_symbol(&kernel, period, 2 * n_modes).unwrap();
        let problem = NewtonProblem {
            coll: Collocation::new(n_modes),
            symbol: &symbol,
            p: kernel.params.p,
        };
        let mut b = vec![0.0; n_modes + 1];
        b[0] = 1.02;
        b[1] = 0.21;
        b[2] = 0.04;
        b[3] = -0.01;
        let jac = problem.jacobian(&b);
        let f0 = problem.residual(&b).unwrap();
        let eps = 1e-7;
        for j in [0usize, 1, 2, 5, n_modes] {
            let mut bp = b.clone();
            bp[j] += eps;
            let fp = problem.residual(&bp).unwrap();
            for m in [0usize, 1, 3, n_modes] {
                let fd = (fp[m] - f0[m]) / eps;
                assert!(
                    (jac[(m, j)] - fd).abs() < 1e-5 * (1.0 + fd.abs()),
                    "J[{m},{j}] = {} vs fd {fd}",
                    jac[(m, j)]
                );
            }
        }
    }

    #[test]
    fn spectral_self_convergence_under_mode_doubling() {
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let period = 1.1 * l_star;
        let coarse = solve_periodic(&kernel, period, 48, Seed::Cosine(0.05)).unwrap();
        let fine = solve_periodic(
            &kernel,
            period,
            96,
            Seed::Continuation(coarse.profile.clone()),
        )
        .unwrap();
        let mut sup = 0.0f64;
        for j in 0..512 {
            let t = period * j as f64 / 512.0;
            sup = sup.max((coarse.profile.eval(t) - fine.profile.eval(t)).abs());
        }
        assert!(sup < 1e-7, "mode doubling changed v by {sup:.2e}");
    }

    #[test]
    fn phase_flipped_seed_yields_translate() {
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let period = 1.1 * l_star;
        let plus = solve_periodic(&kernel, period, 64, Seed::Cosine(0.05)).unwrap();
        let minus = solve_periodic(&kernel, period, 64, Seed::Cosine(-0.05)).unwrap();
        // -cos seed converges to the half-period translate; match after the
        // optimal shift.
        let mut best = f64::INFINITY;
        for shift_idx in 0..256 {
            let a = period * shift_idx as f64 / 256.0;
            let mut sup = 0.0f64;
            for j in 0..128 {
                let t = period * j as f64 / 128.0;
                sup = sup.max((plus.profile.eval(t) - minus.profile.eval(t - a)).abs());
            }
            best = best.min(sup);
        }
        assert!(best < 1e-6, "no translate match: {best:.2e}");
    }

    #[test]
    fn continuation_along_branch() {
        let kernel = sinh_kernel();
        let l_star = bifurcation_period(&kernel).unwrap();
        let branch = continue_branch(&kernel, 1.05 * l_star, 1.4 * l_star, 4, 64).unwrap();
        assert_eq!(branch.len(), 4);
        for point in &branch {
            assert!(point.min_v > 0.0);
            assert!(point.max_v < 2.0 * branch.iter().map(|b| b.max_v).fold(0.0, f64::max));
            assert!(point.residual <= 1e-8);
        }
        // Amplitude grows when leaving the bifurcation point (supercritical
        // branch, recorded from the run itself).
        assert!(branch[1].amplitude > branch[0].amplitude);
    }
}
