//! Executable checks of the qualitative theory.
//!
//! - [`check_intersection`]: nonconstant solutions must cross the constant
//!   solution 1; a one-sided nonconstant profile is a numerical artifact.
//! - [`detect_oscillation`]: searches for an oscillation certificate
//!   `(M, ε)` such that every length-`M` window sees values above `1+ε`
//!   and below `1-ε`.
//! - [`build_negative_direction`]: truncates `|v'|` between critical points
//!   enclosing a full oscillation; the quadratic form on this direction is
//!   certifiably below `-4 K(10M) ε²`.
//! - [`translated_family_bound`]: assembles a Gram matrix of translated
//!   copies of a negative direction; negative definiteness certifies a
//!   Morse-index lower bound equal to the family size.

use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::operator::{assemble_grid_form_at, KernelKind, Profile};
use crate::spectral;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Max/min statistics over one sliding window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowStat {
    pub window: (f64, f64),
    pub max_v: f64,
    pub min_v: f64,
}

/// A verified oscillation pair `(M, ε)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillationCertificate {
    pub m_osc: f64,
    pub epsilon: f64,
    /// Binding windows recorded during the sweep (tightest max and min).
    pub witness_windows: Vec<WindowStat>,
}

/// Outcome of the oscillation search; failure is a valid result (it routes
/// the pipeline to the constant-solution path), not an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum OscillationOutcome {
    Certified(OscillationCertificate),
    Failed(WindowStat),
}

/// Which side a one-sided profile sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Above,
    Below,
}

/// Classification of `v - 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum IntersectionClass {
    /// `‖v - 1‖_∞ ≤ 1e-8` on the scanned range.
    ConstantOne,
    /// Sign-change locations of `v - 1`.
    Crosses(Vec<f64>),
    /// Nonconstant but one-sided: a numerical artifact by the theory.
    Violation(Side),
}

/// Negative direction `η = |v'|` truncated to `[x0, x1]`, mollified at the
/// corners, with its certified form bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegativeDirection {
    pub interval: (f64, f64),
    pub x0: f64,
    pub x1: f64,
    /// Uniform sample grid carrying η (window of the Galerkin form).
    pub eta_nodes: Vec<f64>,
    pub eta: Vec<f64>,
    /// Galerkin value of `Q_v[η]` (after corner mollification).
    pub q_value: f64,
    /// Pre-mollification value (recorded; must agree within 1%).
    pub q_value_raw: f64,
    /// `-4 K(10 M_osc) ε²`.
    pub certified_bound: f64,
    /// `min(-Q, 1/‖η‖_∞)`: both roles of the uniform constant reported.
    pub delta: f64,
    pub sup_norm: f64,
    pub plus_integral: f64,
    pub minus_integral: f64,
    pub m_osc: f64,
    pub epsilon: f64,
}

/// Verdict of the translated-family Gram test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NegativeDefinite,
    Inconclusive,
}

/// Gram-matrix certificate for `ind ≥ m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    pub family_size: usize,
    /// Spacing that produced the verdict (after doubling, if needed).
    pub spacing: f64,
    /// Row-major m×m Gram matrix of the bilinear form.
    pub gram: Vec<f64>,
    pub max_offdiag: f64,
    pub diag: f64,
    pub verdict: Verdict,
    /// `family_size` when negative definite, 0 otherwise.
    pub implied_lower_bound: usize,
    pub support_width: f64,
    pub offsets: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Intersection with the constant solution.
// ---------------------------------------------------------------------------

/// Classify `v - 1` on one period (periodic) or the represented range
/// (grid).
pub fn check_intersection(profile: &Profile) -> Result<IntersectionClass> {
    let (lo, hi) = scan_range(profile);
    let samples = 4096;
    let step = (hi - lo) / samples as f64;
    let f = |t: f64| profile.eval(t) - 1.0;

    let mut dev = 0.0f64;
    let mut mean = 0.0;
    let values: Vec<f64> = (0..=samples)
        .map(|i| {
            let cur = f(lo + step * i as f64);
            dev = dev.max(cur.abs());
            mean += cur;
            cur
        })
        .collect();
    if dev <= 1e-8 {
        return Ok(IntersectionClass::ConstantOne);
    }
    // Interpolation noise at rounding level must not register as crossings.
    let floor = 1e-9 * dev;
    let mut crossings = Vec::new();
    for i in 1..=samples {
        let (prev, cur) = (values[i - 1], values[i]);
        if prev * cur < 0.0 && prev.abs().max(cur.abs()) > floor {
            let t = lo + step * i as f64;
            crossings.push(bisect_root(&f, t - step, t));
        }
    }
    if crossings.is_empty() {
        return Ok(IntersectionClass::Violation(if mean > 0.0 {
            Side::Above
        } else {
            Side::Below
        }));
    }
    if let Profile::Grid(g) = profile {
        let node_spacing = g.min_spacing();
        if crossings.windows(2).any(|w| w[1] - w[0] < 2.0 * node_spacing) {
            return Err(Error::Resolution(
                "sign changes closer than the grid can certify".into(),
            ));
        }
    }
    Ok(IntersectionClass::Crosses(crossings))
}

fn scan_range(profile: &Profile) -> (f64, f64) {
    match profile {
        Profile::Periodic(p) => (p.phase, p.phase + p.period),
        Profile::Grid(g) => (g.nodes[0], *g.nodes.last().unwrap()),
    }
}

fn bisect_root(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Oscillation condition.
// ---------------------------------------------------------------------------

/// Search `(M, ε)` on a lattice: `ε` from half the amplitude downward, `M`
/// from one period upward; the sliding-window brute force is the oracle.
/// The scan covers `[-horizon, horizon]` (periodicity makes one period per
/// window position equivalent, but the scan is literal).
pub fn detect_oscillation(profile: &Profile, horizon: f64) -> Result<OscillationOutcome> {
    let (lo, hi) = match profile {
        Profile::Periodic(_) => (-horizon, horizon),
        Profile::Grid(g) => (g.nodes[0].max(-horizon), g.nodes.last().unwrap().min(horizon)),
    };
    if hi - lo <= 0.0 {
        return Err(Error::Domain("empty oscillation scan range".into()));
    }
    let samples = 16_384usize;
    let step = (hi - lo) / samples as f64;
    let values: Vec<f64> = (0..=samples).map(|i| profile.eval(lo + step * i as f64)).collect();
    let max_v = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_v = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps0 = 0.5 * (max_v - 1.0).min(1.0 - min_v);
    let whole = WindowStat {
        window: (lo, hi),
        max_v,
        min_v,
    };
    if !(eps0 > 0.0) {
        return Ok(OscillationOutcome::Failed(whole));
    }

    let m_base = match profile {
        Profile::Periodic(p) => p.period,
        Profile::Grid(_) => estimate_period(&values, lo, step).unwrap_or((hi - lo) / 4.0),
    };
    let mut last_fail = whole;
    for m_factor in [1.0, 1.25, 1.5, 2.0, 3.0] {
        let m_osc = m_base * m_factor;
        if m_osc > hi - lo {
            break;
        }
        for eps_factor in [1.0, 0.5, 0.25, 0.125] {
            let epsilon = eps0 * eps_factor;
            match sliding_check(&values, lo, step, m_osc, epsilon) {
                Ok(witness_windows) => {
                    return Ok(OscillationOutcome::Certified(OscillationCertificate {
                        m_osc,
                        epsilon,
                        witness_windows,
                    }))
                }
                Err(stat) => last_fail = stat,
            }
        }
    }
    Ok(OscillationOutcome::Failed(last_fail))
}

/// Rough period estimate from crossings of the mean level.
fn estimate_period(values: &[f64], lo: f64, step: f64) -> Option<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut crossings = Vec::new();
    for i in 1..values.len() {
        if (values[i - 1] - mean) * (values[i] - mean) < 0.0 {
            crossings.push(lo + step * i as f64);
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    Some(2.0 * (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64)
}

/// All-windows check via monotonic deques; `Err` carries the offending
/// window (the dichotomy `max ≤ 1+ε` or `min ≥ 1-ε`).
fn sliding_check(
    values: &[f64],
    lo: f64,
    step: f64,
    m_osc: f64,
    epsilon: f64,
) -> std::result::Result<Vec<WindowStat>, WindowStat> {
    let w = (m_osc / step).floor() as usize;
    let n = values.len();
    if w < 2 || w >= n {
        return Err(WindowStat {
            window: (lo, lo + step * n as f64),
            max_v: f64::NAN,
            min_v: f64::NAN,
        });
    }
    let mut max_deque: std::collections::VecDeque<usize> = Default::default();
    let mut min_deque: std::collections::VecDeque<usize> = Default::default();
    let mut tight_max = WindowStat {
        window: (lo, lo + step * w as f64),
        max_v: f64::INFINITY,
        min_v: f64::NAN,
    };
    let mut tight_min = WindowStat {
        window: (lo, lo + step * w as f64),
        max_v: f64::NAN,
        min_v: f64::NEG_INFINITY,
    };
    for i in 0..n {
        while let Some(&back) = max_deque.back() {
            if values[back] <= values[i] {
                max_deque.pop_back();
            } else {
                break;
            }
        }
        max_deque.push_back(i);
        while let Some(&back) = min_deque.back() {
            if values[back] >= values[i] {
                min_deque.pop_back();
            } else {
                break;
            }
        }
        min_deque.push_back(i);
        if i + 1 < w {
            continue;
        }
        let start = i + 1 - w;
        while *max_deque.front().unwrap() < start {
            max_deque.pop_front();
        }
        while *min_deque.front().unwrap() < start {
            min_deque.pop_front();
        }
        let wmax = values[*max_deque.front().unwrap()];
        let wmin = values[*min_deque.front().unwrap()];
        let window = (lo + step * start as f64, lo + step * i as f64);
        if wmax <= 1.0 + epsilon || wmin >= 1.0 - epsilon {
            return Err(WindowStat {
                window,
                max_v: wmax,
                min_v: wmin,
            });
        }
        if wmax < tight_max.max_v {
            tight_max = WindowStat {
                window,
                max_v: wmax,
                min_v: wmin,
            };
        }
        if wmin > tight_min.min_v {
            tight_min = WindowStat {
                window,
                max_v: wmax,
                min_v: wmin,
            };
        }
    }
    Ok(vec![tight_max, tight_min])
}

// ---------------------------------------------------------------------------
// Negative direction from |v'|.
// ---------------------------------------------------------------------------

/// Build the truncated-`|v'|` direction on `interval = [a, b]`,
/// `|b - a| ≥ 5 M_osc`, and certify `Q_v[η] ≤ -4 K(10 M_osc) ε² < 0`.
pub fn build_negative_direction(
    kernel: &KernelModel,
    profile: &Profile,
    cert: &OscillationCertificate,
    interval: (f64, f64),
) -> Result<NegativeDirection> {
    let (a, b) = interval;
    if b - a < 5.0 * cert.m_osc * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "interval length {} below 5 M_osc = {}",
            b - a,
            5.0 * cert.m_osc
        )));
    }

    // Crossings y_1..y_5 of v = 1, one per fifth.
    let mut y = [0.0f64; 5];
    for (i, slot) in y.iter_mut().enumerate() {
        let part = (
            a + (b - a) * i as f64 / 5.0,
            a + (b - a) * (i as f64 + 1.0) / 5.0,
        );
        *slot = first_crossing(profile, part).ok_or_else(|| {
            Error::CertificateInconsistency(format!(
                "no crossing of 1 in part {} of the interval",
                i + 1
            ))
        })?;
    }

    // Critical points: leftmost root of v' after y1, rightmost before y5.
    let scan_step = cert.m_osc / 1024.0;
    let x0 = first_derivative_root(profile, y[0], y[4], scan_step, false).ok_or_else(|| {
        Error::CertificateInconsistency("no critical point right of y1".into())
    })?;
    let x1 = first_derivative_root(profile, y[0], y[4], scan_step, true).ok_or_else(|| {
        Error::CertificateInconsistency("no critical point left of y5".into())
    })?;
    if x1 <= x0 {
        return Err(Error::CertificateInconsistency(format!(
            "degenerate critical pair x0 = {x0}, x1 = {x1}"
        )));
    }

    // Integral bounds of the construction's first step.
    let fine = 8192;
    let dx = (x1 - x0) / fine as f64;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for i in 0..fine {
        let d = profile.deriv(x0 + (i as f64 + 0.5) * dx);
        if d > 0.0 {
            plus += d * dx;
        } else {
            minus -= d * dx;
        }
    }
    if plus <= 2.0 * cert.epsilon || minus <= 2.0 * cert.epsilon {
        return Err(Error::CertificateInconsistency(format!(
            "derivative mass too small: ∫(v')⁺ = {plus:.4}, ∫(v')⁻ = {minus:.4}, need > {}",
            2.0 * cert.epsilon
        )));
    }

    // Galerkin window around the support.
    let h_dir = (x1 - x0) / 2000.0;
    let pad_cells = 12usize;
    let half_cells = 1000 + pad_cells;
    let center = 0.5 * (x0 + x1);
    let m_w = h_dir * half_cells as f64;
    let form = assemble_grid_form_at(kernel, Some(profile), center, m_w, h_dir, KernelKind::Full)?;

    let eta_raw: Vec<f64> = form
        .nodes
        .iter()
        .map(|&t| {
            if t >= x0 && t <= x1 {
                profile.deriv(t).abs()
            } else {
                0.0
            }
        })
        .collect();
    // Corner mollification over one grid cell (the smooth-density step).
    let h_moll = h_dir;
    let ramp = |t: f64| {
        let u = ((t - x0) / h_moll).min((x1 - t) / h_moll).clamp(0.0, 1.0);
        u * u * (3.0 - 2.0 * u)
    };
    let eta: Vec<f64> = form
        .nodes
        .iter()
        .zip(&eta_raw)
        .map(|(&t, &e)| e * ramp(t))
        .collect();

    let q_value_raw = form.q_form(&eta_raw);
    let q_value = form.q_form(&eta);
    let k_10m = kernel.eval(10.0 * cert.m_osc)?;
    let certified_bound = -4.0 * k_10m * cert.epsilon * cert.epsilon;
    if !(q_value <= certified_bound) {
        return Err(Error::CertificateInconsistency(format!(
            "Q[η] = {q_value:.6e} misses the certified bound {certified_bound:.6e}"
        )));
    }
    let sup_norm = eta.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    Ok(NegativeDirection {
        interval,
        x0,
        x1,
        eta_nodes: form.nodes.clone(),
        eta,
        q_value,
        q_value_raw,
        certified_bound,
        delta: (-q_value).min(1.0 / sup_norm),
        sup_norm,
        plus_integral: plus,
        minus_integral: minus,
        m_osc: cert.m_osc,
        epsilon: cert.epsilon,
    })
}

fn first_crossing(profile: &Profile, part: (f64, f64)) -> Option<f64> {
    let samples = 2048;
    let step = (part.1 - part.0) / samples as f64;
    let f = |t: f64| profile.eval(t) - 1.0;
    let mut prev = f(part.0);
    for i in 1..=samples {
        let t = part.0 + step * i as f64;
        let cur = f(t);
        if prev * cur < 0.0 {
            return Some(bisect_root(&f, t - step, t));
        }
        if cur == 0.0 {
            return Some(t);
        }
        prev = cur;
    }
    None
}

/// Root of `v'` by sampling at `step` and bisecting the bracketing
/// interval (40 steps); `from_right` scans backward for the rightmost root.
fn first_derivative_root(
    profile: &Profile,
    lo: f64,
    hi: f64,
    step: f64,
    from_right: bool,
) -> Option<f64> {
    let count = ((hi - lo) / step).ceil() as usize;
    let at = |i: usize| {
        if from_right {
            hi - step * i as f64
        } else {
            lo + step * i as f64
        }
    };
    let d = |t: f64| profile.deriv(t);
    let mut prev = d(at(0));
    for i in 1..=count {
        let t = at(i);
        let cur = d(t);
        if prev * cur <= 0.0 && (prev != 0.0 || cur != 0.0) {
            let (mut a, mut b) = if from_right { (t, at(i - 1)) } else { (at(i - 1), t) };
            let mut f_a = d(a);
            for _ in 0..40 {
                let mid = 0.5 * (a + b);
                let f_mid = d(mid);
                if f_mid == 0.0 {
                    return Some(mid);
                }
                if f_mid.signum() == f_a.signum() {
                    a = mid;
                    f_a = f_mid;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = cur;
    }
    None
}

/// Reduced-formula evaluation of `Q_v[η]`, independent of the Galerkin
/// route (it uses the differentiated equation instead of the assembled
/// form, so it holds for converged solutions).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReducedQ {
    /// `4 ∬_{J⁺×J⁻} K(t-τ) v'(t) v'(τ) dt dτ` (≤ 0 by sign structure).
    pub inner: f64,
    /// Cross-boundary interaction `∬_{J×(ℝ∖J)} v'(t) v'(τ) K(t-τ) dt dτ`.
    /// Testing the differentiated equation with `v'·1_J` produces this term
    /// alongside the inner one; it is negative for directions built by this
    /// construction, so the inner value alone already certifies the bound.
    pub boundary: f64,
    /// `inner + boundary = Q_v[η]` (exact identity).
    pub total: f64,
}

/// Evaluate [`ReducedQ`] on a midpoint lattice of `samples` points over
/// `J = [x0, x1]` (outer integral truncated at the kernel's exponential
/// tail).
pub fn negative_direction_reduced_q(
    kernel: &KernelModel,
    profile: &Profile,
    x0: f64,
    x1: f64,
    samples: usize,
) -> Result<ReducedQ> {
    let dx = (x1 - x0) / samples as f64;
    let derivs: Vec<f64> = (0..samples)
        .map(|i| profile.deriv(x0 + (i as f64 + 0.5) * dx))
        .collect();
    // K on the lattice of pairwise offsets.
    let mut k_lattice = vec![0.0; samples];
    for (d, slot) in k_lattice.iter_mut().enumerate().skip(1) {
        *slot = kernel.eval(d as f64 * dx)?;
    }
    let mut inner = 0.0;
    for (i, &di) in derivs.iter().enumerate() {
        if di <= 0.0 {
            continue;
        }
        for (j, &dj) in derivs.iter().enumerate() {
            if dj >= 0.0 || i == j {
                continue;
            }
            inner += k_lattice[i.abs_diff(j)] * di * dj;
        }
    }
    inner *= 4.0 * dx * dx;

    // Boundary term: τ outside J, truncated where the tail is negligible.
    let alpha = kernel.params.exp_rate();
    let reach = (40.0 / alpha).max(2.0 * (x1 - x0));
    let outer = (reach / dx).ceil() as usize;
    let mut boundary = 0.0;
    for (i, &di) in derivs.iter().enumerate() {
        if di == 0.0 {
            continue;
        }
        let t = x0 + (i as f64 + 0.5) * dx;
        let mut row = 0.0;
        for j in 1..=outer {
            let off = (j as f64 - 0.5) * dx;
            let tau_l = x0 - off;
            let tau_r = x1 + off;
            row += profile.deriv(tau_l) * kernel.eval(t - tau_l)?
                + profile.deriv(tau_r) * kernel.eval(tau_r - t)?;
        }
        boundary += di * row;
    }
    boundary *= dx * dx;

    Ok(ReducedQ {
        inner,
        boundary,
        total: inner + boundary,
    })
}

// ---------------------------------------------------------------------------
// Translated-family Morse-index bound.
// ---------------------------------------------------------------------------

/// Source of the base direction for the translated family.
pub enum FamilySource<'a> {
    /// `v ≡ 1`: use the first eigenfunction of a window where
    /// `λ₁(M) < 4s/(n-2s)`.
    ConstantOne,
    /// A previously constructed truncated-`|v'|` direction.
    Direction(&'a NegativeDirection),
}

/// Assemble the Gram matrix of `m` translated copies spaced by `d` (plus
/// the support width) and check negative definiteness; on failure the
/// spacing doubles until success or the search cap, reporting the final
/// spacing either way.
pub fn translated_family_bound(
    kernel: &KernelModel,
    profile: &Profile,
    source: FamilySource<'_>,
    family_size: usize,
    spacing: f64,
) -> Result<IndexReport> {
    if family_size < 1 {
        return Err(Error::Domain("family size must be at least 1".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::Domain("spacing must be positive".into()));
    }

    // Base direction on its own uniform grid.
    let (grid_h, vector, diag, support_width) = match source {
        FamilySource::Direction(nd) => {
            let h = nd.eta_nodes[1] - nd.eta_nodes[0];
            (h, nd.eta.clone(), nd.q_value, nd.x1 - nd.x0 + 2.0 * h)
        }
        FamilySource::ConstantOne => {
            let lin = kernel.params.lin_coeff;
            let mut m_b = 4.0;
            let mut found = None;
            while m_b <= 512.0 {
                let res = spectral::lambda1(kernel, m_b, 2.0 * m_b / 512.0, KernelKind::Full)?;
                if res.lambda1 < 0.9 * lin {
                    found = Some(res);
                    break;
                }
                m_b *= 2.0;
            }
            let res = found.ok_or_else(|| {
                Error::NoBifurcation {
                    target: lin,
                }
            })?;
            let h = 2.0 * res.m_half / 512.0;
            // Normalize to unit mass norm: diagonal is λ₁ - (p-1).
            let form = assemble_grid_form_at(
                kernel,
                Some(&Profile::constant(1.0)),
                0.0,
                res.m_half,
                h,
                KernelKind::Full,
            )?;
            let norm = form.mass_norm2(&res.phi1).sqrt();
            let phi: Vec<f64> = res.phi1.iter().map(|x| x / norm).collect();
            let diag = form.q_form(&phi);
            (h, phi, diag, 2.0 * res.m_half)
        }
    };
    if !(diag < 0.0) {
        return Err(Error::CertificateInconsistency(format!(
            "base direction is not negative: Q = {diag:.3e}"
        )));
    }

    // Spacing search by doubling.
    let period = match profile {
        Profile::Periodic(p) => Some(p.period),
        _ => None,
    };
    let cap = 1e3 * support_width.max(spacing);
    let mut d = spacing;
    loop {
        let report = family_gram(kernel, &vector, grid_h, diag, support_width, family_size, d, period)?;
        if report.verdict == Verdict::NegativeDefinite || 2.0 * d > cap {
            return Ok(report);
        }
        d *= 2.0;
    }
}

#[allow(clippy::too_many_arguments)]
fn family_gram(
    kernel: &KernelModel,
    vector: &[f64],
    grid_h: f64,
    diag: f64,
    support_width: f64,
    family_size: usize,
    d: f64,
    period: Option<f64>,
) -> Result<IndexReport> {
    // Offset step: gap d plus the support width, rounded up to a whole
    // number of periods for periodic profiles so every copy sees the same
    // potential (the diagonal entries coincide exactly).
    let mut step = d + support_width;
    if let Some(l) = period {
        step = (step / l).ceil() * l;
    }
    let offsets: Vec<f64> = (0..family_size).map(|j| j as f64 * step).collect();

    let n = vector.len();
    let mut gram = DMatrix::zeros(family_size, family_size);
    let mut max_offdiag = 0.0f64;
    for i in 0..family_size {
        gram[(i, i)] = diag;
    }
    for gap_idx in 1..family_size {
        let delta = step * gap_idx as f64;
        // K on the lattice of node offsets between the two copies.
        let mut k_lattice = vec![0.0; 2 * n - 1];
        for (idx, slot) in k_lattice.iter_mut().enumerate() {
            let arg = delta + (idx as f64 - (n as f64 - 1.0)) * grid_h;
            *slot = kernel.eval(arg)?;
        }
        // Cross term of the bilinear form for disjoint supports:
        // A[ψ_i, ψ_j] = -∬ K(x - y + Δ) φ(x) φ(y) dx dy.
        let mut cross = 0.0;
        for (a, &va) in vector.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (b, &vb) in vector.iter().enumerate() {
                row += vb * k_lattice[(n - 1 + b) - a];
            }
            cross += va * row;
        }
        let value = -cross * grid_h * grid_h;
        for i in 0..family_size - gap_idx {
            gram[(i, i + gap_idx)] = value;
            gram[(i + gap_idx, i)] = value;
        }
        max_offdiag = max_offdiag.max(value.abs());
    }

    let largest = gram
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if largest < 0.0 {
        Verdict::NegativeDefinite
    } else {
        Verdict::Inconclusive
    };
    Ok(IndexReport {
        family_size,
        spacing: d,
        gram: gram.iter().copied().collect(),
        max_offdiag,
        diag,
        verdict,
        implied_lower_bound: if verdict == Verdict::NegativeDefinite {
            family_size
        } else {
            0
        },
        support_width,
        offsets,
    })
}

/// Convenience accessor used by tests: Gram entry (i, j).
impl IndexReport {
    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.family_size + j]
    }
}
