//! Galerkin matrices of the quadratic form on an interval.
//!
//! For piecewise-linear hat functions on a uniform grid the stiffness
//! entries of `𝒯(φ) = ½ ∬ K(t-τ)(φ(t)-φ(τ))² dt dτ` depend only on the
//! index offset: with `R` the hat autocorrelation (`R(η) = h B(η/h)`, `B`
//! the cubic B-spline shape) the bilinear form reduces exactly to
//!
//! ```text
//! S_ij = ∫_0^∞ K(ξ) [2R(mh) - R(mh+ξ) - R(mh-ξ)] dξ,   m = |i-j|,
//! ```
//!
//! a single 1D integral whose integrand vanishes quadratically at ξ = 0.
//! The pure-power kernel part is integrated in closed form piecewise
//! (`B` is piecewise cubic), the bounded remainder by adaptive quadrature,
//! and the exponential tail by the kernel's series expansion. Matrices are
//! dense symmetric Toeplitz; boundary conditions enter through the use of
//! interior hats only (support in `[-M, M]`), not through any tail term.

use super::profile::Profile;
use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::quad::{self, QuadOpts};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Kernel used in the stiffness assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// Full hypergeometric kernel.
    Full,
    /// Pure-power comparison kernel `A0 |ξ|^{-1-2s}` (exact scaling law).
    PurePower,
}

/// Assembly metadata carried into exports and manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormMeta {
    pub n: u32,
    pub s: f64,
    pub gamma: f64,
    pub m_half: f64,
    pub h: f64,
    pub kind: KernelKind,
    pub has_potential: bool,
    pub quad_rel_tol: f64,
}

/// Dense symmetric matrices of the discretized quadratic form.
#[derive(Debug, Clone)]
pub struct GridForm {
    /// Interior nodes `center-M+h, ..., center+M-h`.
    pub nodes: Vec<f64>,
    pub h: f64,
    pub m_half: f64,
    /// Window center (the window is `[center-M, center+M]`).
    pub center: f64,
    /// Nonlocal stiffness of `𝒯` (symmetric positive definite Toeplitz).
    pub stiffness: DMatrix<f64>,
    /// Mass matrix (symmetric positive definite tridiagonal).
    pub mass: DMatrix<f64>,
    /// Potential `∫ (1 - p v^{p-1}) φ_i φ_j dt`, when a profile is supplied.
    pub potential: Option<DMatrix<f64>>,
    pub meta: FormMeta,
}

impl GridForm {
    /// `φᵀ S φ` (the `𝒯` part alone).
    pub fn t_form(&self, phi: &[f64]) -> f64 {
        quadratic(&self.stiffness, phi)
    }

    /// `φᵀ (S + V) φ` (V skipped when absent).
    pub fn q_form(&self, phi: &[f64]) -> f64 {
        let mut q = self.t_form(phi);
        if let Some(v) = &self.potential {
            q += quadratic(v, phi);
        }
        q
    }

    /// `φᵀ B φ`.
    pub fn mass_norm2(&self, phi: &[f64]) -> f64 {
        quadratic(&self.mass, phi)
    }

    /// Rayleigh quotient `φᵀ(S+V)φ / φᵀBφ`; with no potential this is the
    /// first-eigenvalue quotient of `𝒯`.
    pub fn rayleigh(&self, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.nodes.len() {
            return Err(Error::Domain(format!(
                "vector length {} does not match {} nodes",
                phi.len(),
                self.nodes.len()
            )));
        }
        let b = self.mass_norm2(phi);
        if !(b > 0.0) {
            return Err(Error::Domain("rayleigh quotient of the zero vector".into()));
        }
        Ok(self.q_form(phi) / b)
    }

    /// CSV triplets `matrix,i,j,value` for all assembled matrices.
    pub fn csv_triplets(&self) -> String {
        let mut out = String::from("matrix,i,j,value\n");
        let mut dump = |label: &str, m: &DMatrix<f64>| {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        out.push_str(&format!("{label},{i},{j},{v:.17e}\n"));
                    }
                }
            }
        };
        dump("S", &self.stiffness);
        dump("B", &self.mass);
        if let Some(v) = &self.potential {
            dump("V", v);
        }
        out
    }

    /// JSON header describing the assembly.
    pub fn json_header(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("meta serializes")
    }
}

fn quadratic(m: &DMatrix<f64>, phi: &[f64]) -> f64 {
    let n = phi.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * phi[j];
        }
        acc += phi[i] * row;
    }
    acc
}

/// Hat autocorrelation shape and derivatives: `B(x)` is the cubic B-spline
/// `∫ tent(t) tent(t-x) dt` for unit tents, supported on |x| ≤ 2.
fn tent_autocorr(x: f64, order: u32) -> f64 {
    let a = x.abs();
    let sg = if x >= 0.0 { 1.0 } else { -1.0 };
    if a >= 2.0 {
        return 0.0;
    }
    if a <= 1.0 {
        match order {
            0 => 2.0 / 3.0 - a * a + a * a * a / 2.0,
            1 => sg * (-2.0 * a + 1.5 * a * a),
            2 => -2.0 + 3.0 * a,
            3 => 3.0 * sg,
            _ => 0.0,
        }
    } else {
        let w = 2.0 - a;
        match order {
            0 => w * w * w / 6.0,
            1 => -sg * w * w / 2.0,
            2 => w,
            3 => -sg,
            _ => 0.0,
        }
    }
}

/// `D(x) = 2B(m) - B(m+x) - B(m-x)` and derivatives (all in grid units).
fn second_difference(m: f64, x: f64, order: u32) -> f64 {
    let plus = tent_autocorr(m + x, order);
    let minus = tent_autocorr(m - x, order);
    match order {
        0 => 2.0 * tent_autocorr(m, 0) - plus - minus,
        _ if order % 2 == 1 => -plus + minus,
        _ => -plus - minus,
    }
}

/// `∫_l^r x^e dx` via expm1, stable through e → -1 (the s = 1/2 log case).
fn power_integral(l: f64, r: f64, e: f64) -> f64 {
    debug_assert!(l > 0.0 && r > l);
    let q = e + 1.0;
    let log_ratio = (r / l).ln();
    if q.abs() < 1e-14 {
        l.powf(q) * log_ratio
    } else {
        l.powf(q) * (q * log_ratio).exp_m1() / q
    }
}

/// Exact `∫_0^{xmax} x^{-1-2s} D(x) dx` over the piecewise-cubic pieces of D.
fn pure_power_entry_dimensionless(m: usize, s: f64, xmax: f64) -> f64 {
    if xmax <= 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    let mut knots: Vec<f64> = (-2..=2)
        .map(|j| mf + j as f64)
        .filter(|&x| x > 1e-12 && x < xmax - 1e-12)
        .collect();
    knots.insert(0, 0.0);
    knots.push(xmax);

    let mut total = 0.0;
    for w in knots.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r - l < 1e-14 {
            continue;
        }
        let mu = 0.5 * (l + r);
        let d3 = second_difference(mf, mu, 3) / 6.0;
        if l == 0.0 {
            // D(0) = D'(0) = 0 exactly: the piece is d2 x² + d3 x³.
            let d2 = 0.5 * (second_difference(mf, mu, 2) - 6.0 * d3 * mu);
            total += d2 * r.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s)
                + d3 * r.powf(3.0 - 2.0 * s) / (3.0 - 2.0 * s);
        } else {
            let t0 = second_difference(mf, mu, 0);
            let t1 = second_difference(mf, mu, 1);
            let t2 = second_difference(mf, mu, 2) / 2.0;
            let t3 = d3;
            // Monomial coefficients from the Taylor form around μ.
            let c = [
                t0 - t1 * mu + t2 * mu * mu - t3 * mu * mu * mu,
                t1 - 2.0 * t2 * mu + 3.0 * t3 * mu * mu,
                t2 - 3.0 * t3 * mu,
                t3,
            ];
            for (i, ci) in c.iter().enumerate() {
                if *ci != 0.0 {
                    total += ci * power_integral(l, r, i as f64 - 1.0 - 2.0 * s);
                }
            }
        }
    }
    total
}

/// Toeplitz stiffness entries `g(0), ..., g(count-1)`.
fn toeplitz_entries(
    kernel: &KernelModel,
    h: f64,
    count: usize,
    kind: KernelKind,
) -> Result<Vec<f64>> {
    let s = kernel.params.s;
    let a0 = kernel.a0;
    (0..count)
        .into_par_iter()
        .map(|m| {
            let mf = m as f64;
            let w_end = (mf + 2.0) * h; // D vanishes identically below (m-2)h and is constant above
            let tail_weight = 2.0 * h * tent_autocorr(mf, 0); // only m ≤ 1 nonzero

            if kind == KernelKind::PurePower {
                let body = a0 * h.powf(1.0 - 2.0 * s)
                    * pure_power_entry_dimensionless(m, s, mf + 2.0);
                let tail = tail_weight * a0 * w_end.powf(-2.0 * s) / (2.0 * s);
                return Ok(body + tail);
            }

            // Full kernel: closed-form pure-power part near the singularity,
            // bounded remainder and smooth far part adaptively, series tail.
            let cut = w_end.min(1.0);
            let body_pp =
                a0 * h.powf(1.0 - 2.0 * s) * pure_power_entry_dimensionless(m, s, cut / h);
            let support_lo = ((mf - 2.0) * h).max(0.0);
            let knots: Vec<f64> = (-2..=2)
                .map(|j| (mf + j as f64) * h)
                .filter(|&x| x > 0.0)
                .collect();
            let mut remainder = 0.0;
            if support_lo < cut {
                let mut breaks = vec![support_lo];
                breaks.extend(knots.iter().copied().filter(|&x| x > support_lo && x < cut));
                breaks.push(cut);
                remainder = quad::adaptive_segmented(
                    |xi| {
                        let diff = kernel.eval(xi).unwrap_or(0.0)
                            - kernel.eval_pure_power(xi).unwrap_or(0.0);
                        diff * h * second_difference(mf, xi / h, 0)
                    },
                    &breaks,
                    QuadOpts {
                        rel_tol: 1e-10,
                        abs_tol: 1e-15,
                        max_subdiv: 800,
                    },
                )?;
            }
            let mut far = 0.0;
            if w_end > cut {
                let mut breaks = vec![cut];
                breaks.extend(knots.iter().copied().filter(|&x| x > cut && x < w_end));
                breaks.push(w_end);
                far = quad::adaptive_segmented(
                    |xi| kernel.eval(xi).unwrap_or(0.0) * h * second_difference(mf, xi / h, 0),
                    &breaks,
                    QuadOpts {
                        rel_tol: 1e-10,
                        abs_tol: 1e-15,
                        max_subdiv: 800,
                    },
                )?;
            }
            let tail = if tail_weight != 0.0 {
                tail_weight * kernel.tail_mass_one_sided(w_end)?
            } else {
                0.0
            };
            Ok(body_pp + remainder + far + tail)
        })
        .collect()
}

/// Assemble the Galerkin matrices on `[-M, M]` with uniform step `h`
/// (`h` must divide `2M`). The potential term `∫(1 - p v^{p-1}) φ_i φ_j` is
/// included when a profile is supplied; `None` gives the bare `𝒯` form used
/// by the first-eigenvalue problem.
pub fn assemble_grid_form(
    kernel: &KernelModel,
    profile: Option<&Profile>,
    m_half: f64,
    h: f64,
    kind: KernelKind,
) -> Result<GridForm> {
    assemble_grid_form_at(kernel, profile, 0.0, m_half, h, kind)
}

/// As [`assemble_grid_form`], on the translated window `[c-M, c+M]`. The
/// stiffness is translation invariant (Toeplitz); only node positions and
/// the potential samples move.
pub fn assemble_grid_form_at(
    kernel: &KernelModel,
    profile: Option<&Profile>,
    center: f64,
    m_half: f64,
    h: f64,
    kind: KernelKind,
) -> Result<GridForm> {
    if !(m_half > 0.0) || !(h > 0.0) {
        return Err(Error::Domain(format!("need M > 0 and h > 0, got ({m_half}, {h})")));
    }
    let ratio = 2.0 * m_half / h;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio {
        return Err(Error::Domain(format!(
            "h = {h} does not divide 2M = {}",
            2.0 * m_half
        )));
    }
    let cells = ratio.round() as usize;
    if cells < 17 {
        return Err(Error::Resolution(format!(
            "fewer than 16 interior nodes ({} cells on [-M, M])",
            cells
        )));
    }
    let n = cells - 1;
    let nodes: Vec<f64> = (1..cells).map(|i| center - m_half + h * i as f64).collect();

    let g = toeplitz_entries(kernel, h, n, kind)?;
    let stiffness = DMatrix::from_fn(n, n, |i, j| g[i.abs_diff(j)]);
    let mass = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 * h / 3.0,
        1 => h / 6.0,
        _ => 0.0,
    });

    let potential = match profile {
        None => None,
        Some(v) => Some(assemble_potential(kernel, v, center, m_half, h, n)?),
    };

    Ok(GridForm {
        nodes,
        h,
        m_half,
        center,
        stiffness,
        mass,
        meta: FormMeta {
            n: kernel.params.n,
            s: kernel.params.s,
            gamma: kernel.params.gamma_ns,
            m_half,
            h,
            kind,
            has_potential: potential.is_some(),
            quad_rel_tol: 1e-10,
        },
        potential,
    })
}

/// `V_ij = ∫ (1 - p v^{p-1}) φ_i φ_j dt` by 4-point Gauss per element.
fn assemble_potential(
    kernel: &KernelModel,
    profile: &Profile,
    center: f64,
    m_half: f64,
    h: f64,
    n: usize,
) -> Result<DMatrix<f64>> {
    let p = kernel.params.p;
    let (gx, gw) = quad::gauss_legendre(4);
    let mut v_mat = DMatrix::zeros(n, n);
    for cell in 0..=n {
        let x_left = center - m_half + h * cell as f64;
        // Dof indices of the two hats alive on this cell (interior only).
        let left_dof = cell.checked_sub(1);
        let right_dof = if cell < n { Some(cell) } else { None };
        let mut acc = [0.0f64; 3]; // (left,left), (right,right), (left,right)
        for (xi, wi) in gx.iter().zip(&gw) {
            let t = x_left + 0.5 * h * (xi + 1.0);
            let vv = profile.eval(t);
            if !(vv > 0.0) {
                return Err(Error::Positivity { min_v: vv });
            }
            let w = (1.0 - p * vv.powf(p - 1.0)) * 0.5 * h * wi;
            let phi_r = 0.5 * (xi + 1.0);
            let phi_l = 1.0 - phi_r;
            acc[0] += w * phi_l * phi_l;
            acc[1] += w * phi_r * phi_r;
            acc[2] += w * phi_l * phi_r;
        }
        if let Some(i) = left_dof {
            v_mat[(i, i)] += acc[0];
        }
        if let Some(j) = right_dof {
            v_mat[(j, j)] += acc[1];
        }
        if let (Some(i), Some(j)) = (left_dof, right_dof) {
            v_mat[(i, j)] += acc[2];
            v_mat[(j, i)] += acc[2];
        }
    }
    Ok(v_mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ProblemParams;
    use crate::operator::pointwise::PointwiseP;
    use crate::operator::profile::GridProfile;

    fn kernel(n: u32, s: f64, gamma: f64) -> KernelModel {
        let params = ProblemParams::with_unit_gamma(n, s).unwrap().with_gamma(gamma);
        KernelModel::new(params).unwrap()
    }

    /// Brute-force oracle for the dimensionless pure-power entry; the
    /// substitution x = w⁸ absorbs the x^{1-2s} endpoint behavior so plain
    /// adaptive quadrature reaches full accuracy.
    fn entry_oracle(m: usize, s: f64, xmax: f64) -> f64 {
        quad::adaptive(
            |w| {
                let x = w.powi(8);
                8.0 * w.powi(7) * x.powf(-1.0 - 2.0 * s) * second_difference(m as f64, x, 0)
            },
            0.0,
            xmax.powf(0.125),
            QuadOpts {
                rel_tol: 1e-11,
                abs_tol: 1e-14,
                max_subdiv: 8000,
            },
        )
        .unwrap()
    }

    #[test]
    fn pure_power_entry_matches_quadrature_oracle() {
        for s in [0.25, 0.5, 0.75, 0.9] {
            for m in [0usize, 1, 2, 3, 7] {
                let xmax = m as f64 + 2.0;
                let exact = pure_power_entry_dimensionless(m, s, xmax);
                let brute = entry_oracle(m, s, xmax);
                let scale = exact.abs().max(1e-10);
                assert!(
                    (exact - brute).abs() < 1e-7 * scale,
                    "m={m}, s={s}: exact {exact}, brute {brute}"
                );
            }
        }
    }

    #[test]
    fn stiffness_symmetric_and_positive_definite() {
        let k = kernel(3, 0.5, 2.0);
        let form = assemble_grid_form(&k, None, 2.0, 0.1, KernelKind::Full).unwrap();
        let s = &form.stiffness;
        assert_eq!(s, &s.transpose());
        let eigs = s.clone().symmetric_eigenvalues();
        assert!(eigs.iter().all(|&e| e > 0.0), "min eig {:?}", eigs.min());
        let b_eigs = form.mass.clone().symmetric_eigenvalues();
        assert!(b_eigs.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn off_diagonal_entries_negative() {
        let k = kernel(4, 0.75, 1.0);
        let g = toeplitz_entries(&k, 0.05, 24, KernelKind::Full).unwrap();
        assert!(g[0] > 0.0);
        for m in 1..24 {
            assert!(g[m] < 0.0, "g({m}) = {}", g[m]);
        }
    }

    #[test]
    fn full_entries_match_direct_quadrature() {
        let k = kernel(2, 0.5, 1.5);
        let h = 0.21;
        let g = toeplitz_entries(&k, h, 9, KernelKind::Full).unwrap();
        for m in [0usize, 1, 2, 5, 8] {
            let mf = m as f64;
            let direct = quad::adaptive(
                |xi| k.eval_uncached(xi).unwrap() * h * second_difference(mf, xi / h, 0),
                0.0,
                (mf + 2.0) * h,
                QuadOpts {
                    rel_tol: 1e-11,
                    abs_tol: 1e-15,
                    max_subdiv: 8000,
                },
            )
            .unwrap()
                + 2.0 * h * tent_autocorr(mf, 0) * k.tail_mass_one_sided((mf + 2.0) * h).unwrap();
            assert!(
                (g[m] - direct).abs() < 1e-8 * direct.abs().max(1e-8),
                "m={m}: assembled {}, direct {direct}",
                g[m]
            );
        }
    }

    #[test]
    fn pure_power_scaling_is_exact() {
        // Doubling (M, h) scales pure-power stiffness entries by 2^{1-2s}
        // and Rayleigh quotients by 2^{-2s}.
        let s = 0.75;
        let k = kernel(4, s, 1.0);
        let f1 = assemble_grid_form(&k, None, 1.0, 0.05, KernelKind::PurePower).unwrap();
        let f2 = assemble_grid_form(&k, None, 2.0, 0.10, KernelKind::PurePower).unwrap();
        let factor = 2.0f64.powf(1.0 - 2.0 * s);
        for (a, b) in f1.stiffness.iter().zip(f2.stiffness.iter()) {
            assert!((b - factor * a).abs() <= 1e-12 * a.abs().max(1e-300));
        }
        let phi: Vec<f64> = f1.nodes.iter().map(|&t| (1.0 - t * t).max(0.0)).collect();
        let r1 = f1.rayleigh(&phi).unwrap();
        let r2 = f2.rayleigh(&phi).unwrap();
        assert!(
            (r2 / r1 - 2.0f64.powf(-2.0 * s)).abs() < 1e-11,
            "quotients {r1}, {r2}"
        );
    }

    #[test]
    fn flat_interior_vector_sees_only_tail_interaction() {
        let k = kernel(3, 0.5, 2.0);
        let form = assemble_grid_form(&k, None, 4.0, 0.1, KernelKind::Full).unwrap();
        // Piecewise-linear taper: 1 on [-3, 3], linear to 0 at ±4.
        let phi: Vec<f64> = form
            .nodes
            .iter()
            .map(|&t| ((4.0 - t.abs()).min(1.0)).max(0.0))
            .collect();
        let val = form.t_form(&phi);
        assert!(val > 0.0);
        // Tapering further out (flat part wider) must increase cost only
        // through the boundary layer; the form stays bounded.
        assert!(val < 10.0, "unexpectedly large flat-vector energy {val}");
    }

    #[test]
    fn grid_form_consistent_with_pointwise_quadrature() {
        // φᵀSφ + φᵀVφ reproduces ∫ φ P φ + ∫(1-p v^{p-1})φ² computed by
        // independent pointwise quadrature, within 0.5%.
        let k = kernel(3, 0.5, 2.0);
        let m_half = 3.0;
        let h = 0.025;
        let bump = |t: f64| (1.0 - (t / m_half).powi(2)).powi(2).max(0.0);
        let one = Profile::constant(1.0);
        let form = assemble_grid_form(&k, Some(&one), m_half, h, KernelKind::Full).unwrap();
        let phi: Vec<f64> = form.nodes.iter().map(|&t| bump(t)).collect();
        let galerkin = form.q_form(&phi);

        // Pointwise side: P φ by quadrature on the spline interpolant.
        let wide = GridProfile::from_fn(-12.0, 12.0, 1921, |t| {
            if t.abs() < m_half {
                bump(t)
            } else {
                0.0
            }
        }, 0.0)
        .unwrap();
        let profile = Profile::Grid(wide);
        let engine = PointwiseP::for_profile(&k, &profile).unwrap();
        let p = k.params.p;
        let mut integral = 0.0;
        // Simpson over the interior nodes.
        let count = form.nodes.len();
        for (i, &t) in form.nodes.iter().enumerate() {
            let w = if i == 0 || i == count - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let pphi = engine.apply(&profile, t).unwrap();
            let val = bump(t) * pphi + (1.0 - p) * bump(t) * bump(t);
            integral += w * val * h / 3.0;
        }
        assert!(
            (galerkin - integral).abs() < 0.005 * integral.abs(),
            "galerkin {galerkin} vs pointwise {integral}"
        );
    }

    #[test]
    fn rejects_coarse_and_nondividing_grids() {
        let k = kernel(3, 0.5, 2.0);
        assert!(matches!(
            assemble_grid_form(&k, None, 1.0, 0.3, KernelKind::Full),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            assemble_grid_form(&k, None, 1.0, 0.25, KernelKind::Full),
            Err(Error::Resolution(_))
        ));
    }
}
