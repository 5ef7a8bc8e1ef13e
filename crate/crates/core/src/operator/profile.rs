//! Candidate solutions of the reduced equation: periodic Fourier profiles
//! and sampled grid profiles with cubic-spline interpolation.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A candidate solution `v` of the reduced equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Profile {
    Periodic(PeriodicProfile),
    Grid(GridProfile),
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Periodic(PeriodicProfile {
            period: 1.0,
            cosine: vec![value],
            phase: 0.0,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Periodic(p) => p.eval(t),
            Profile::Grid(g) => g.eval(t),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            Profile::Periodic(p) => p.derivative(t, 1),
            Profile::Grid(g) => g.deriv(t),
        }
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        match self {
            Profile::Periodic(p) => p.derivative(t, 2),
            Profile::Grid(g) => g.deriv2(t),
        }
    }

    /// The translate `v(· - a)`.
    pub fn translate(&self, a: f64) -> Self {
        match self {
            Profile::Periodic(p) => Profile::Periodic(p.translate(a)),
            Profile::Grid(g) => Profile::Grid(g.translate(a)),
        }
    }

    /// Interval on which the profile is represented exactly; unbounded for
    /// periodic profiles.
    pub fn core_range(&self) -> (f64, f64) {
        match self {
            Profile::Periodic(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Profile::Grid(g) => (g.nodes[0], *g.nodes.last().unwrap()),
        }
    }

    /// Sup-norm bound used for far-field truncation.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Profile::Periodic(p) => p.cosine.iter().map(|c| c.abs()).sum(),
            Profile::Grid(g) => g
                .values
                .iter()
                .chain(std::iter::once(&g.far_value))
                .fold(0.0f64, |m, &v| m.max(v.abs())),
        }
    }
}

/// Real periodic profile in a cosine basis:
/// `v(t) = Σ_m c_m cos(k_m (t - phase))`, `k_m = 2πm/L`.
///
/// The cosine basis encodes the conjugate symmetry of a real even profile;
/// translations are carried by `phase` so translated profiles stay exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicProfile {
    pub period: f64,
    pub cosine: Vec<f64>,
    pub phase: f64,
}

impl PeriodicProfile {
    pub fn new(period: f64, cosine: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::Domain(format!("period must be positive, got {period}")));
        }
        if cosine.is_empty() {
            return Err(Error::Domain("empty coefficient vector".into()));
        }
        Ok(PeriodicProfile {
            period,
            cosine,
            phase: 0.0,
        })
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.period
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// d^order v / dt^order for order ≤ 4 (exact in the basis).
    pub fn derivative(&self, t: f64, order: u32) -> f64 {
        let tau = t - self.phase;
        let mut sum = 0.0;
        for (m, &c) in self.cosine.iter().enumerate() {
            let k = self.wavenumber(m);
            let kt = k * tau;
            let factor = k.powi(order as i32);
            let basis = match order % 4 {
                0 => kt.cos(),
                1 => -kt.sin(),
                2 => -kt.cos(),
                3 => kt.sin(),
                _ => unreachable!(),
            };
            sum += c * factor * basis;
        }
        sum
    }

    pub fn translate(&self, a: f64) -> Self {
        PeriodicProfile {
            period: self.period,
            cosine: self.cosine.clone(),
            phase: self.phase + a,
        }
    }

    /// `(min v, max v)` over one period, sampled at `samples` points with
    /// local refinement around the extrema.
    pub fn min_max(&self, samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut t_lo = 0.0;
        let mut t_hi = 0.0;
        for i in 0..samples {
            let t = self.phase + self.period * i as f64 / samples as f64;
            let v = self.eval(t);
            if v < lo {
                lo = v;
                t_lo = t;
            }
            if v > hi {
                hi = v;
                t_hi = t;
            }
        }
        // Golden-section polish around the sampled extrema.
        let step = self.period / samples as f64;
        lo = lo.min(self.refine_extremum(t_lo, step, false));
        hi = hi.max(self.refine_extremum(t_hi, step, true));
        (lo, hi)
    }

    fn refine_extremum(&self, center: f64, step: f64, maximize: bool) -> f64 {
        let sign = if maximize { -1.0 } else { 1.0 };
        let f = |t: f64| sign * self.eval(t);
        let (mut a, mut b) = (center - step, center + step);
        const INVPHI: f64 = 0.618_033_988_749_895;
        let mut c = b - INVPHI * (b - a);
        let mut d = a + INVPHI * (b - a);
        for _ in 0..60 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - INVPHI * (b - a);
            d = a + INVPHI * (b - a);
        }
        sign * f(0.5 * (a + b))
    }

    /// `‖v - 1‖_∞` over one period.
    pub fn amplitude(&self) -> f64 {
        let (lo, hi) = self.min_max(1024);
        (hi - 1.0).abs().max((1.0 - lo).abs())
    }

    /// Sample onto a uniform grid profile covering `[a, b]`.
    pub fn to_grid(&self, a: f64, b: f64, step: f64) -> Result<GridProfile> {
        let count = ((b - a) / step).round() as usize + 1;
        let nodes: Vec<f64> = (0..count).map(|i| a + step * i as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|&t| self.eval(t)).collect();
        let far = self.eval(*nodes.last().unwrap());
        GridProfile::new(nodes, values, far)
    }
}

/// Sampled profile with natural cubic-spline interpolation and an explicit
/// far-field constant beyond the last node (solutions of the reduced
/// equation do not decay, so zero-extension would be wrong).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridProfile {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub far_value: f64,
    /// Second derivatives at the nodes (natural spline).
    second_derivs: Vec<f64>,
}

impl GridProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, far_value: f64) -> Result<Self> {
        if nodes.len() < 4 || nodes.len() != values.len() {
            return Err(Error::Resolution(format!(
                "grid profile needs >= 4 nodes, got {} nodes / {} values",
                nodes.len(),
                values.len()
            )));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Domain("grid nodes must be strictly increasing".into()));
        }
        let second_derivs = natural_spline_second_derivs(&nodes, &values);
        Ok(GridProfile {
            nodes,
            values,
            far_value,
            second_derivs,
        })
    }

    pub fn from_fn(a: f64, b: f64, count: usize, f: impl Fn(f64) -> f64, far_value: f64) -> Result<Self> {
        let nodes: Vec<f64> = (0..count)
            .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
            .collect();
        let values: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
        Self::new(nodes, values, far_value)
    }

    fn interval(&self, t: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|v| v.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.nodes[0] {
            if t == self.nodes[0] {
                return self.values[0];
            }
            return self.far_value;
        }
        if t >= *self.nodes.last().unwrap() {
            if t == *self.nodes.last().unwrap() {
                return *self.values.last().unwrap();
            }
            return self.far_value;
        }
        let i = self.interval(t);
        let h = self.nodes[i + 1] - self.nodes[i];
        let a = (self.nodes[i + 1] - t) / h;
        let b = (t - self.nodes[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second_derivs[i] + (b * b * b - b) * self.second_derivs[i + 1])
                * h
                * h
                / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if t < self.nodes[0] || t > *self.nodes.last().unwrap() {
            return 0.0;
        }
        let i = self.interval(t);
        let h = self.nodes[i + 1] - self.nodes[i];
        let a = (self.nodes[i + 1] - t) / h;
        let b = (t - self.nodes[i]) / h;
        (self.values[i + 1] - self.values[i]) / h
            - (3.0 * a * a - 1.0) * h * self.second_derivs[i] / 6.0
            + (3.0 * b * b - 1.0) * h * self.second_derivs[i + 1] / 6.0
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        if t < self.nodes[0] || t > *self.nodes.last().unwrap() {
            return 0.0;
        }
        let i = self.interval(t);
        let h = self.nodes[i + 1] - self.nodes[i];
        let a = (self.nodes[i + 1] - t) / h;
        let b = (t - self.nodes[i]) / h;
        a * self.second_derivs[i] + b * self.second_derivs[i + 1]
    }

    /// One-sided third derivatives `(v'''(t⁻), v'''(t⁺))`; they differ at the
    /// knots, where the symmetric second difference picks up a cubic term.
    pub fn deriv3_sides(&self, t: f64) -> (f64, f64) {
        let last = *self.nodes.last().unwrap();
        if t < self.nodes[0] || t > last {
            return (0.0, 0.0);
        }
        let d3 = |i: usize| {
            (self.second_derivs[i + 1] - self.second_derivs[i]) / (self.nodes[i + 1] - self.nodes[i])
        };
        let i = self.interval(t);
        let right = d3(i);
        let left = if t == self.nodes[i] && i > 0 {
            d3(i - 1)
        } else {
            right
        };
        (left, right)
    }

    pub fn translate(&self, a: f64) -> Self {
        GridProfile {
            nodes: self.nodes.iter().map(|&x| x + a).collect(),
            values: self.values.clone(),
            far_value: self.far_value,
            second_derivs: self.second_derivs.clone(),
        }
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Second derivatives of the natural cubic spline through `(x, y)` (Thomas
/// tridiagonal solve).
fn natural_spline_second_derivs(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    // Forward sweep (lower diagonal is h0 = x[i]-x[i-1]).
    for i in 2..n - 1 {
        let h0 = x[i] - x[i - 1];
        let w = h0 / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for i in (1..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * if i + 1 < n - 1 { m[i + 1] } else { 0.0 }) / diag[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_eval_and_derivatives() {
        let p = PeriodicProfile::new(2.0 * std::f64::consts::PI, vec![1.0, 0.3]).unwrap();
        // v = 1 + 0.3 cos t on period 2π.
        for t in [-1.0, 0.0, 0.4, 2.0] {
            assert!((p.eval(t) - (1.0 + 0.3 * t.cos())).abs() < 1e-14);
            assert!((p.derivative(t, 1) + 0.3 * t.sin()).abs() < 1e-14);
            assert!((p.derivative(t, 2) + 0.3 * t.cos()).abs() < 1e-14);
            assert!((p.derivative(t, 4) - 0.3 * t.cos()).abs() < 1e-14);
        }
        let (lo, hi) = p.min_max(512);
        assert!((lo - 0.7).abs() < 1e-10 && (hi - 1.3).abs() < 1e-10);
        assert!((p.amplitude() - 0.3).abs() < 1e-10);
    }

    #[test]
    fn translate_shifts_profile() {
        let p = PeriodicProfile::new(3.0, vec![1.0, 0.2, 0.05]).unwrap();
        let q = p.translate(0.7);
        for t in [0.0, 1.1, 2.9] {
            assert!((q.eval(t) - p.eval(t - 0.7)).abs() < 1e-14);
        }
    }

    #[test]
    fn spline_reproduces_smooth_function() {
        let f = |t: f64| (1.0 + 0.4 * (1.3 * t).cos()).exp();
        let g = GridProfile::from_fn(-5.0, 5.0, 801, f, f(5.0)).unwrap();
        for t in [-4.3, -0.9, 0.0, 2.123, 4.7] {
            let err = (g.eval(t) - f(t)).abs();
            assert!(err < 2e-7, "t={t}: err {err}");
            let df = f(t) * (-0.4 * 1.3 * (1.3 * t).sin());
            assert!((g.deriv(t) - df).abs() < 2e-4);
        }
        // Outside the range the far value applies.
        assert_eq!(g.eval(7.0), f(5.0));
    }

    #[test]
    fn grid_profile_rejects_bad_inputs() {
        assert!(GridProfile::new(vec![0.0, 1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(GridProfile::new(
            vec![0.0, 1.0, 0.5, 2.0],
            vec![1.0; 4],
            1.0
        )
        .is_err());
    }
}
