//! Angular factor `U(θ)` of a homogeneous potential and its central
//! configurations.
//!
//! `U` is a real trigonometric polynomial
//! `U(θ) = a₀ + Σₖ aₖ cos kθ + bₖ sin kθ`, so every derivative is exact and
//! periodicity is structural.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::{Euclid, Float};

use crate::{Error, Result};

/// Value and first two derivatives of `U` at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    constant: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

impl TrigPolynomial {
    /// Coefficient lists are indexed by frequency starting at `k = 1`; the
    /// shorter list is padded with zeros.
    pub fn new(constant: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        let mut cos_coeffs = cos_coeffs;
        let mut sin_coeffs = sin_coeffs;
        let len = cos_coeffs.len().max(sin_coeffs.len());
        cos_coeffs.resize(len, 0.0);
        sin_coeffs.resize(len, 0.0);
        while cos_coeffs.last() == Some(&0.0) && sin_coeffs.last() == Some(&0.0) {
            cos_coeffs.pop();
            sin_coeffs.pop();
        }
        TrigPolynomial { constant, cos_coeffs, sin_coeffs }
    }

    pub fn constant_potential(c: f64) -> Self {
        TrigPolynomial::new(c, Vec::new(), Vec::new())
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos_coeffs
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin_coeffs
    }

    /// Highest frequency present.
    pub fn degree(&self) -> usize {
        self.cos_coeffs.len()
    }

    pub fn is_constant(&self) -> bool {
        self.cos_coeffs.is_empty()
    }

    pub fn value(&self, theta: f64) -> f64 {
        let mut acc = self.constant;
        for (i, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let k = (i + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }

    /// `U`, `U'`, `U''` by term-wise differentiation.
    pub fn jet(&self, theta: f64) -> Jet {
        let mut value = self.constant;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (i, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let k = (i + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            let even = a * c + b * s;
            value += even;
            d1 += k * (b * c - a * s);
            d2 -= k * k * even;
        }
        Jet { value, d1, d2 }
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.jet(theta).d1
    }

    /// Upper bound on `|U'|`, used to scale root tolerances.
    pub fn derivative_scale(&self) -> f64 {
        let s: f64 = self
            .cos_coeffs
            .iter()
            .zip(&self.sin_coeffs)
            .enumerate()
            .map(|(i, (a, b))| (i + 1) as f64 * (a.abs() + b.abs()))
            .sum();
        s.max(f64::MIN_POSITIVE)
    }

    /// `θ ↦ factor · U(m θ)`: frequencies multiplied by `m`, coefficients by `factor`.
    pub fn compose_frequency(&self, m: usize, factor: f64) -> TrigPolynomial {
        assert!(m >= 1, "frequency multiplier must be positive");
        let len = self.degree() * m;
        let mut cos_coeffs = alloc::vec![0.0; len];
        let mut sin_coeffs = alloc::vec![0.0; len];
        for (i, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let k = (i + 1) * m;
            cos_coeffs[k - 1] = factor * a;
            sin_coeffs[k - 1] = factor * b;
        }
        TrigPolynomial::new(factor * self.constant, cos_coeffs, sin_coeffs)
    }

    /// `(U_min, U_max)` over a period.
    pub fn extremes(&self) -> (f64, f64) {
        if self.is_constant() {
            return (self.constant, self.constant);
        }
        let scan = ScanConfig::default();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for theta in critical_angles(self, &scan) {
            let u = self.value(theta);
            lo = lo.min(u);
            hi = hi.max(u);
        }
        // Dense grid as a floor in case a root was polished away from an extremum.
        for i in 0..scan.samples {
            let u = self.value(TAU * i as f64 / scan.samples as f64);
            lo = lo.min(u);
            hi = hi.max(u);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Degenerate,
}

/// A critical point of `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralConfiguration {
    pub angle: f64,
    pub value: f64,
    pub curvature: f64,
    pub kind: CriticalKind,
}

impl CentralConfiguration {
    /// `U''/U` at the configuration.
    pub fn normalized_curvature(&self) -> f64 {
        self.curvature / self.value
    }
}

/// Sampling density and polish tolerances for the root scan of `U'`.
#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub samples: usize,
    pub root_tol: f64,
    /// Relative threshold on `|U''| / U` below which a root is degenerate.
    pub degeneracy_rel: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { samples: 2048, root_tol: 1e-12, degeneracy_rel: 1e-9 }
    }
}

/// `(U(θ), U'(θ), U''(θ))`.
pub fn eval_jet(u: &TrigPolynomial, theta: f64) -> (f64, f64, f64) {
    let j = u.jet(theta);
    (j.value, j.d1, j.d2)
}

pub fn classify_curvature(value: f64, curvature: f64, degeneracy_rel: f64) -> CriticalKind {
    if curvature.abs() <= degeneracy_rel * value.abs().max(f64::MIN_POSITIVE) {
        CriticalKind::Degenerate
    } else if curvature > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Maximum
    }
}

/// All critical points of `U` in `[0, 2π)`, sorted by angle.
///
/// Simple roots of `U'` come from a sign-change scan followed by safeguarded
/// Newton polishing. Roots of even multiplicity do not change sign; they are
/// caught as near-zero local minima of `|U'|` and reported as degenerate.
pub fn find_central_configurations(
    u: &TrigPolynomial,
    tol: f64,
) -> Result<Vec<CentralConfiguration>> {
    let scan = ScanConfig { root_tol: tol, ..ScanConfig::default() };
    find_central_configurations_with(u, &scan)
}

pub fn find_central_configurations_with(
    u: &TrigPolynomial,
    scan: &ScanConfig,
) -> Result<Vec<CentralConfiguration>> {
    if u.is_constant() {
        return Err(Error::ConstantPotential);
    }
    let out = critical_angles(u, scan)
        .into_iter()
        .map(|angle| {
            let j = u.jet(angle);
            CentralConfiguration {
                angle,
                value: j.value,
                curvature: j.d2,
                kind: classify_curvature(j.value, j.d2, scan.degeneracy_rel),
            }
        })
        .collect();
    Ok(out)
}

fn critical_angles(u: &TrigPolynomial, scan: &ScanConfig) -> Vec<f64> {
    let n = scan.samples.max(16);
    let step = TAU / n as f64;
    let scale = u.derivative_scale();
    let tol = scan.root_tol * scale.max(1.0);
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let d: Vec<f64> = grid.iter().map(|&t| u.derivative(t)).collect();

    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (d[i], d[i + 1]);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(polish_root(|t| u.jet(t).d1, |t| u.jet(t).d2, a, b, fa, tol));
        }
    }
    // Even-multiplicity roots: |U'| has a tiny local minimum without a sign change.
    for i in 1..n {
        let (fl, fc, fr) = (d[i - 1], d[i], d[i + 1]);
        let local_min = fc.abs() < fl.abs() && fc.abs() <= fr.abs();
        if fc != 0.0 && local_min && fl * fc > 0.0 && fc * fr > 0.0 && fc.abs() < 1e-6 * scale {
            let (a, b) = (grid[i - 1], grid[i + 1]);
            let (ga, gb) = (u.jet(a).d2, u.jet(b).d2);
            if ga * gb < 0.0 {
                let third = |t: f64| third_derivative(u, t);
                let t = polish_root(|t| u.jet(t).d2, third, a, b, ga, 1e-15);
                if u.derivative(t).abs() < tol {
                    roots.push(t);
                }
            }
        }
    }

    for r in roots.iter_mut() {
        *r = Euclid::rem_euclid(r, &TAU);
        if *r >= TAU - 1e-12 {
            *r = 0.0;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if roots.len() > 1 && roots[0] + TAU - roots[roots.len() - 1] < 1e-9 {
        roots.pop();
    }
    roots
}

fn third_derivative(u: &TrigPolynomial, theta: f64) -> f64 {
    u.cos_coeffs
        .iter()
        .zip(&u.sin_coeffs)
        .enumerate()
        .map(|(i, (a, b))| {
            let k = (i + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            k * k * k * (a * s - b * c)
        })
        .sum()
}

/// Newton iteration kept inside a sign-change bracket, falling back to bisection.
fn polish_root<F, D>(f: F, df: D, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx * fa < 0.0 {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        x = if slope != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (b - a).abs() < 4.0 * f64::EPSILON * x.abs().max(1.0) || (fx.abs() < tol && (b - a) < 1e-9)
        {
            if f(x).abs() <= fx.abs() {
                return x;
            }
        }
    }
    x
}

/// One failed clause of membership in the admissible class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassFailure {
    /// `U` is not strictly positive (minimum value reported).
    NotPositive { min_value: f64 },
    /// The angle with the given index (0 or 1) is not critical.
    NotCritical { which: usize, derivative: f64 },
    /// `U'' ≤ 0` (or degenerate) at the angle with the given index.
    NotNondegenerateMinimum { which: usize, curvature: f64 },
    /// `U(θ₁) ≠ U(θ₂)`.
    UnequalLevels { first: f64, second: f64 },
    /// The level at the angle is above the global minimum of `U`.
    NotGlobalMinimum { which: usize, value: f64, global_min: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDiagnosis {
    pub failures: Vec<ClassFailure>,
}

impl ClassDiagnosis {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that `θ₁, θ₂` are nondegenerate global minima of a positive `U`
/// at a common level. Every failing clause is reported.
pub fn check_class_u(u: &TrigPolynomial, theta1: f64, theta2: f64) -> Result<ClassDiagnosis> {
    if !(0.0..TAU).contains(&theta1) || !(0.0..TAU).contains(&theta2) || theta1 > theta2 {
        return Err(Error::InvalidInput("need 0 <= theta1 <= theta2 < 2*pi"));
    }
    let scan = ScanConfig::default();
    let crit_tol = 1e-8 * u.derivative_scale().max(1.0);
    let mut failures = Vec::new();

    let (u_min, _) = u.extremes();
    if u_min <= 0.0 {
        failures.push(ClassFailure::NotPositive { min_value: u_min });
    }
    let level_tol = 1e-9 * u_min.abs().max(1.0);
    let jets = [u.jet(theta1), u.jet(theta2)];
    for (which, j) in jets.iter().enumerate() {
        if j.d1.abs() > crit_tol {
            failures.push(ClassFailure::NotCritical { which, derivative: j.d1 });
        }
        if classify_curvature(j.value, j.d2, scan.degeneracy_rel) != CriticalKind::Minimum {
            failures.push(ClassFailure::NotNondegenerateMinimum { which, curvature: j.d2 });
        }
    }
    if (jets[0].value - jets[1].value).abs() > level_tol {
        failures.push(ClassFailure::UnequalLevels { first: jets[0].value, second: jets[1].value });
    }
    for (which, j) in jets.iter().enumerate() {
        if j.value > u_min + level_tol {
            failures.push(ClassFailure::NotGlobalMinimum { which, value: j.value, global_min: u_min });
        }
    }
    Ok(ClassDiagnosis { failures })
}

/// `U''(θ̄) < −(2−α)²/8 · U(θ̄)` at a critical angle `θ̄`.
pub fn too_strict_test(u: &TrigPolynomial, theta_bar: f64, alpha: f64) -> Result<bool> {
    let j = u.jet(theta_bar);
    let tol = 1e-8 * u.derivative_scale().max(1.0);
    if j.d1.abs() >= tol {
        return Err(Error::NotCritical { angle: theta_bar, derivative: j.d1 });
    }
    Ok(j.d2 < -(2.0 - alpha).powi(2) / 8.0 * j.value)
}

/// Reduces an angle to `(-π, π]`.
pub(crate) fn wrap_pi(x: f64) -> f64 {
    let y = Euclid::rem_euclid(&(x + PI), &TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}
