//! Eigenvalue computations on intervals.
//!
//! - `lambda1`: the first eigenvalue `λ₁(M)` of the quadratic form `𝒯`
//!   restricted to functions supported in `[-M, M]`, with its nonnegative
//!   eigenfunction; `kernel_mode = PurePower` gives the comparison
//!   eigenvalue `μ₁(M)` obeying the exact scaling `μ₁(M) = μ₁(1) M^{-2s}`.
//! - `morse_count`: the number of negative generalized eigenvalues of the
//!   second-variation form `(S + V, B)` at a profile, i.e. a certified
//!   lower bound on the Morse index over the window.

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::operator::{assemble_grid_form, GridForm, KernelKind, Profile};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// First-eigenvalue result on `[-M, M]`.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda1: f64,
    /// L²(B)-normalized, nonnegative eigenvector on the interior nodes.
    pub phi1: Vec<f64>,
    pub m_half: f64,
    pub h: f64,
    pub kernel_mode: KernelKind,
    /// `‖(S - λ₁ B) φ₁‖ / ‖B φ₁‖`.
    pub residual: f64,
}

/// Negative-direction count of the second variation on a window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorseCount {
    pub m_half: f64,
    pub count: usize,
    pub negative_eigenvalues: Vec<f64>,
    pub tol_negative: f64,
}

/// Generalized symmetric eigenvalues of `(A, B)` with `B` SPD, via Cholesky
/// reduction to a standard symmetric problem.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("mass matrix not positive definite".into()))?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let mut c = a.clone();
    l.solve_lower_triangular_mut(&mut c);
    c.transpose_mut();
    l.solve_lower_triangular_mut(&mut c);
    // Symmetrize against rounding.
    let c = 0.5 * (&c + c.transpose());
    let mut eigs: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

/// Smallest generalized eigenpair of `(A, B)` by shifted inverse iteration.
fn smallest_eigenpair(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    lambda_min: f64,
    gap: f64,
) -> Result<DVector<f64>> {
    let n = a.nrows();
    let shift = lambda_min - 1e-3 * gap.max(1e-12 * lambda_min.abs().max(1.0));
    let shifted = a - b * shift;
    let lu = shifted.lu();
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let rhs = b * &x;
        let y = lu
            .solve(&rhs)
            .ok_or_else(|| Error::NonConvergence { iters: 0, residual })?;
        let norm = (y.dot(&(b * &y))).sqrt();
        x = y / norm;
        let r = a * &x - b * &x * lambda_min;
        residual = r.norm() / (b * &x).norm();
        if residual < 1e-9 {
            break;
        }
    }
    Ok(x)
}

/// First eigenvalue of `(S, B)` on `[-M, M]` with eigenfunction.
///
/// The eigenvector is sign-normalized to its nonnegative representative
/// (the form does not increase under `φ → |φ|`, so the ground state has a
/// sign); interior positivity is a maximum-principle consequence and is
/// asserted by the caller's tests rather than enforced here.
pub fn lambda1(
    kernel: &KernelModel,
    m_half: f64,
    h: f64,
    kernel_mode: KernelKind,
) -> Result<EigenResult> {
    let cells = (2.0 * m_half / h).round() as usize;
    if cells < 65 {
        return Err(Error::Resolution(format!(
            "lambda1 needs at least 64 interior nodes, got {}",
            cells.saturating_sub(1)
        )));
    }
    let form = assemble_grid_form(kernel, None, m_half, h, kernel_mode)?;
    lambda1_of_form(&form)
}

/// As [`lambda1`], on an already-assembled potential-free form.
pub fn lambda1_of_form(form: &GridForm) -> Result<EigenResult> {
    let eigs = generalized_eigenvalues(&form.stiffness, &form.mass)?;
    let lambda1 = eigs[0];
    let gap = if eigs.len() > 1 { eigs[1] - eigs[0] } else { 1.0 };
    let mut phi = smallest_eigenpair(&form.stiffness, &form.mass, lambda1, gap)?;

    // Nonnegative representative; ties resolved by the max-magnitude entry.
    let (idx, _) = phi
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap();
    if phi[idx] < 0.0 {
        phi.neg_mut();
    }

    let r = &form.stiffness * &phi - &form.mass * &phi * lambda1;
    let residual = r.norm() / (&form.mass * &phi).norm();
    Ok(EigenResult {
        lambda1,
        phi1: phi.iter().copied().collect(),
        m_half: form.m_half,
        h: form.h,
        kernel_mode: form.meta.kind,
        residual,
    })
}

/// Count generalized eigenvalues of `(S + V, B)` below `-tol_negative`,
/// `tol_negative = 1e-8 ‖S+V‖_max` (separates genuine negative directions
/// from discretization noise).
pub fn morse_count(
    kernel: &KernelModel,
    profile: &Profile,
    m_half: f64,
    h: f64,
) -> Result<MorseCount> {
    morse_count_at(kernel, profile, 0.0, m_half, h)
}

/// As [`morse_count`], on the window `[c-M, c+M]`.
pub fn morse_count_at(
    kernel: &KernelModel,
    profile: &Profile,
    center: f64,
    m_half: f64,
    h: f64,
) -> Result<MorseCount> {
    let form =
        crate::operator::assemble_grid_form_at(kernel, Some(profile), center, m_half, h, KernelKind::Full)?;
    morse_count_of_form(&form)
}

/// As [`morse_count`], on an already-assembled form with potential.
pub fn morse_count_of_form(form: &GridForm) -> Result<MorseCount> {
    let v = form
        .potential
        .as_ref()
        .ok_or_else(|| Error::Domain("morse count needs the potential term".into()))?;
    let a = &form.stiffness + v;
    let tol_negative = 1e-8 * a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let eigs = generalized_eigenvalues(&a, &form.mass)?;
    let negative: Vec<f64> = eigs
        .iter()
        .copied()
        .take_while(|&e| e < -tol_negative)
        .collect();
    Ok(MorseCount {
        m_half: form.m_half,
        count: negative.len(),
        negative_eigenvalues: negative,
        tol_negative,
    })
}

/// Rayleigh quotient of a grid vector against a form (potential included
/// when present). Thin, validated wrapper over [`GridForm::rayleigh`].
pub fn rayleigh_quotient(form: &GridForm, phi: &[f64]) -> Result<f64> {
    form.rayleigh(phi)
}
