//! First-order reduction of the zero-energy flow.
//!
//! Writing the position as `(r, θ)` and the velocity direction as `φ`, the
//! zero-energy equations of motion for `V = U(θ)/r^α` become, after a
//! rescaling of time,
//!
//! ```text
//! θ' = 2U sin(φ−θ)
//! φ' = U' cos(φ−θ) + αU sin(φ−θ)
//! r' = 2rU cos(φ−θ)
//! ```
//!
//! with physical time recovered from `dt/dτ = z r^{1+α/2}`, `z = √(2U(θ))`.
//! The radial equation decouples, so the `(θ, φ)` plane carries the whole
//! geometry. `v = √U cos(φ−θ)` is non-decreasing along every orbit.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::integrator::{self, Event, IntegratorConfig, Solution};
use crate::potential::{find_central_configurations, CentralConfiguration, CriticalKind, TrigPolynomial};
use crate::{Error, Result};

/// Point of the reduced plane; both angles live on the universal cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub theta: f64,
    pub phi: f64,
}

impl PhaseState {
    pub fn new(theta: f64, phi: f64) -> Self {
        PhaseState { theta, phi }
    }

    /// `φ − θ`, the angle between velocity and position.
    pub fn delta(&self) -> f64 {
        self.phi - self.theta
    }

    /// Image under time reversal: `(θ, φ) ↦ (θ, φ + π)`.
    pub fn reversed(&self) -> Self {
        PhaseState { theta: self.theta, phi: self.phi + core::f64::consts::PI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl ExtendedState {
    pub fn phase(&self) -> PhaseState {
        PhaseState { theta: self.theta, phi: self.phi }
    }
}

pub fn check_exponent(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(alpha))
    }
}

/// `(θ', φ')` at `s`.
pub fn vector_field(u: &TrigPolynomial, alpha: f64, s: PhaseState) -> [f64; 2] {
    let jet = u.jet(s.theta);
    let (sd, cd) = s.delta().sin_cos();
    [2.0 * jet.value * sd, jet.d1 * cd + alpha * jet.value * sd]
}

/// `(r', θ', φ')` at `s`.
pub fn extended_field(u: &TrigPolynomial, alpha: f64, s: ExtendedState) -> Result<[f64; 3]> {
    if !(s.r > 0.0) {
        return Err(Error::InvalidInput("radius must be positive"));
    }
    let [dtheta, dphi] = vector_field(u, alpha, s.phase());
    let r_dot = 2.0 * s.r * u.value(s.theta) * s.phase().delta().cos();
    Ok([r_dot, dtheta, dphi])
}

/// `√U(θ) cos(φ − θ)`; it vanishes exactly on the pericenter lines.
pub fn v_value(u: &TrigPolynomial, s: PhaseState) -> f64 {
    u.value(s.theta).max(0.0).sqrt() * s.delta().cos()
}

/// `v' = (2−α) U^{3/2} sin²(φ−θ)`.
pub fn v_derivative(u: &TrigPolynomial, alpha: f64, s: PhaseState) -> f64 {
    let uv = u.value(s.theta);
    let sd = s.delta().sin();
    (2.0 - alpha) * uv * uv.max(0.0).sqrt() * sd * sd
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Saddle,
    Sink,
    Source,
    /// `U''` vanishes at the base configuration; linearization is inconclusive.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub base: CentralConfiguration,
    /// `φ* = θ* + parity·π`.
    pub parity: u8,
    pub stability: Stability,
}

impl Equilibrium {
    pub fn state(&self) -> PhaseState {
        PhaseState::new(self.base.angle, self.base.angle + f64::from(self.parity) * core::f64::consts::PI)
    }
}

/// Equilibria `(θ*, θ* + hπ)`, `h ∈ {0, 1}`, over every central configuration.
///
/// Minima give saddles for both parities. At maxima the parity-0 point is a
/// sink and the parity-1 point a source. A constant potential has a whole
/// line of equilibria and yields [`Error::ConstantPotential`].
pub fn classify_equilibria(u: &TrigPolynomial) -> Result<Vec<Equilibrium>> {
    let configs = find_central_configurations(u, 1e-12)?;
    let mut out = Vec::with_capacity(2 * configs.len());
    for base in configs {
        for parity in 0..2u8 {
            let stability = match (base.kind, parity) {
                (CriticalKind::Minimum, _) => Stability::Saddle,
                (CriticalKind::Maximum, 0) => Stability::Sink,
                (CriticalKind::Maximum, _) => Stability::Source,
                (CriticalKind::Degenerate, _) => Stability::Degenerate,
            };
            out.push(Equilibrium { base, parity, stability });
        }
    }
    Ok(out)
}

/// Jacobian of `(θ', φ')` at the equilibrium `(θ*, θ* + parity·π)`.
pub fn jacobian(u: &TrigPolynomial, alpha: f64, theta: f64, parity: u8) -> [[f64; 2]; 2] {
    let jet = u.jet(theta);
    let c = if parity % 2 == 0 { 1.0 } else { -1.0 };
    [
        [-2.0 * c * jet.value, 2.0 * c * jet.value],
        [c * (jet.d2 - alpha * jet.value), c * alpha * jet.value],
    ]
}

/// Eigen-data of a saddle at a nondegenerate minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleLinearization {
    /// Eigenvalue of the Jacobian: positive (unstable) for parity 1,
    /// negative (stable) for parity 0. Its modulus is `U(θ*)·λ₊`.
    pub eigenvalue: f64,
    /// `λ₊ = ((2−α) + √((2−α)² + 8μ))/2` with `μ = U''/U`.
    pub lambda_plus: f64,
    /// Slope `v₂ = 1 − λ₊/2` of the eigendirection `(1, v₂)`.
    pub slope: f64,
    /// `(1, v₂)` normalized to unit length.
    pub direction: [f64; 2],
}

/// Unstable eigenpair of `(θ*, θ*+π)` (parity 1) or stable eigenpair of
/// `(θ*, θ*)` (parity 0). Both share the slope `v₂`.
pub fn linearize_saddle(
    u: &TrigPolynomial,
    alpha: f64,
    theta: f64,
    parity: u8,
) -> Result<SaddleLinearization> {
    check_exponent(alpha)?;
    let jet = u.jet(theta);
    let tol = 1e-8 * u.derivative_scale().max(jet.value.abs());
    if jet.d1.abs() > tol {
        return Err(Error::NotCritical { angle: theta, derivative: jet.d1 });
    }
    if !(jet.value > 0.0) || !(jet.d2 > 1e-9 * jet.value) {
        return Err(Error::NotNondegenerateMinimum { angle: theta, curvature: jet.d2 });
    }
    let mu = jet.d2 / jet.value;
    let a = 2.0 - alpha;
    let lambda_plus = 0.5 * (a + (a * a + 8.0 * mu).sqrt());
    let slope = 1.0 - 0.5 * lambda_plus;
    let norm = (1.0 + slope * slope).sqrt();
    let sign = if parity % 2 == 0 { -1.0 } else { 1.0 };
    Ok(SaddleLinearization {
        eigenvalue: sign * jet.value * lambda_plus,
        lambda_plus,
        slope,
        direction: [1.0 / norm, slope / norm],
    })
}

/// Integrates the reduced field from `s0` over `[tau0, tau_end]` (either direction).
pub fn integrate_orbit(
    u: &TrigPolynomial,
    alpha: f64,
    s0: PhaseState,
    tau0: f64,
    tau_end: f64,
    cfg: &IntegratorConfig,
    events: &[Event<'_, 2>],
) -> Result<Solution<2>> {
    check_exponent(alpha)?;
    let field = |_: f64, y: &[f64; 2]| vector_field(u, alpha, PhaseState::new(y[0], y[1]));
    integrator::integrate(field, tau0, [s0.theta, s0.phi], tau_end, cfg, events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn fig2() -> TrigPolynomial {
        TrigPolynomial::new(2.0, vec![0.0, -1.0], vec![])
    }

    #[test]
    fn field_examples() {
        let one = TrigPolynomial::constant_potential(1.0);
        let f = vector_field(&one, 1.0, PhaseState::new(0.0, FRAC_PI_2));
        assert!((f[0] - 2.0).abs() < 1e-15 && (f[1] - 1.0).abs() < 1e-15);

        let f = vector_field(&fig2(), 0.5, PhaseState::new(FRAC_PI_4, FRAC_PI_4 + FRAC_PI_2));
        assert!((f[0] - 4.0).abs() < 1e-14 && (f[1] - 1.0).abs() < 1e-14);

        for th in [0.0, FRAC_PI_2, PI] {
            for h in [0.0, 1.0] {
                let f = vector_field(&fig2(), 0.7, PhaseState::new(th, th + h * PI));
                assert!(f[0].abs() < 1e-14 && f[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn extended_examples() {
        let one = TrigPolynomial::constant_potential(1.0);
        let f = extended_field(&one, 1.0, ExtendedState { r: 1.0, theta: 0.0, phi: FRAC_PI_2 }).unwrap();
        assert!(f[0].abs() < 1e-15 && (f[1] - 2.0).abs() < 1e-15 && (f[2] - 1.0).abs() < 1e-15);

        let f = extended_field(&one, 1.0, ExtendedState { r: 2.0, theta: 0.0, phi: PI }).unwrap();
        assert!((f[0] + 4.0).abs() < 1e-15);

        let f = extended_field(&fig2(), 1.3, ExtendedState { r: 3.0, theta: 0.0, phi: 0.0 }).unwrap();
        assert!((f[0] - 6.0).abs() < 1e-15 && f[1] == 0.0 && f[2] == 0.0);

        assert!(extended_field(&one, 1.0, ExtendedState { r: 0.0, theta: 0.0, phi: 0.0 }).is_err());
    }

    #[test]
    fn v_examples() {
        let u = fig2();
        assert!((v_value(&u, PhaseState::new(0.3, 0.3 + PI)) + u.value(0.3).sqrt()).abs() < 1e-15);
        assert!(v_value(&u, PhaseState::new(0.3, 0.3 + FRAC_PI_2)).abs() < 1e-15);
        assert!((v_value(&u, PhaseState::new(FRAC_PI_2, FRAC_PI_2)) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn v_derivative_matches_chain_rule() {
        let u = TrigPolynomial::new(2.0, vec![0.1, -1.0], vec![0.2]);
        let alpha = 0.8;
        let s = PhaseState::new(0.4, 2.3);
        let f = vector_field(&u, alpha, s);
        let h = 1e-6;
        let plus = v_value(&u, PhaseState::new(s.theta + h * f[0], s.phi + h * f[1]));
        let minus = v_value(&u, PhaseState::new(s.theta - h * f[0], s.phi - h * f[1]));
        let fd = (plus - minus) / (2.0 * h);
        assert!((fd - v_derivative(&u, alpha, s)).abs() < 1e-8);
    }

    #[test]
    fn equilibria_of_fig2() {
        let eq = classify_equilibria(&fig2()).unwrap();
        assert_eq!(eq.len(), 8);
        let saddles: Vec<_> = eq.iter().filter(|e| e.stability == Stability::Saddle).collect();
        assert_eq!(saddles.len(), 4);
        assert!(saddles.iter().any(|e| e.base.angle.abs() < 1e-12 && e.parity == 1));
        assert!(saddles.iter().any(|e| (e.base.angle - PI).abs() < 1e-12 && e.parity == 0));
        let at_max = eq.iter().filter(|e| (e.base.angle - FRAC_PI_2).abs() < 1e-12);
        let kinds: Vec<_> = at_max.map(|e| e.stability).collect();
        assert_eq!(kinds, vec![Stability::Sink, Stability::Source]);
        for e in &eq {
            let f = vector_field(&fig2(), 0.9, e.state());
            assert!(f[0].abs() < 1e-12 && f[1].abs() < 1e-12);
        }
    }

    #[test]
    fn constant_potential_has_no_isolated_equilibria() {
        assert_eq!(
            classify_equilibria(&TrigPolynomial::constant_potential(1.0)),
            Err(Error::ConstantPotential)
        );
    }

    #[test]
    fn perturbed_equilibria_keep_their_count() {
        let u = TrigPolynomial::new(2.0, vec![0.0, -1.0], vec![0.1]);
        let eq = classify_equilibria(&u).unwrap();
        assert_eq!(eq.len(), 8);
        assert_eq!(eq.iter().filter(|e| e.stability == Stability::Saddle).count(), 4);
        assert!(eq.iter().all(|e| e.base.angle.abs() > 1e-3 || e.base.kind != CriticalKind::Minimum));
    }

    #[test]
    fn saddle_linearization_example() {
        let lin = linearize_saddle(&fig2(), 1.0, 0.0, 1).unwrap();
        let expect = 0.5 * (1.0 + 33f64.sqrt());
        assert!((lin.lambda_plus - expect).abs() < 1e-13);
        assert!((lin.eigenvalue - expect).abs() < 1e-13);
        assert!((lin.slope + 0.686140661634507).abs() < 1e-12);

        // The returned pair really is an eigenpair of the Jacobian, for both parities.
        for parity in [0u8, 1] {
            let lin = linearize_saddle(&fig2(), 1.0, PI, parity).unwrap();
            let j = jacobian(&fig2(), 1.0, PI, parity);
            let d = lin.direction;
            for row in 0..2 {
                let jd = j[row][0] * d[0] + j[row][1] * d[1];
                assert!((jd - lin.eigenvalue * d[row]).abs() < 1e-12);
            }
        }
        assert!(linearize_saddle(&fig2(), 1.0, PI, 0).unwrap().eigenvalue < 0.0);
    }

    #[test]
    fn slope_derivative_in_alpha() {
        let h = 1e-6;
        let up = linearize_saddle(&fig2(), 1.0 + h, 0.0, 1).unwrap().slope;
        let dn = linearize_saddle(&fig2(), 1.0 - h, 0.0, 1).unwrap().slope;
        let expect = 0.25 + 1.0 / (4.0 * 33f64.sqrt());
        assert!(((up - dn) / (2.0 * h) - expect).abs() < 1e-7);
    }

    #[test]
    fn saddle_rejections() {
        assert!(matches!(
            linearize_saddle(&fig2(), 1.0, FRAC_PI_2, 1),
            Err(Error::NotNondegenerateMinimum { .. })
        ));
        assert!(matches!(linearize_saddle(&fig2(), 1.0, 0.3, 1), Err(Error::NotCritical { .. })));
        assert!(matches!(linearize_saddle(&fig2(), 2.0, 0.0, 1), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn constant_potential_bundle() {
        let one = TrigPolynomial::constant_potential(1.0);
        let alpha = 0.6;
        let s0 = PhaseState::new(0.2, 2.5);
        let sol = integrate_orbit(&one, alpha, s0, 0.0, 20.0, &IntegratorConfig::default(), &[]).unwrap();
        let c0 = s0.phi - 0.5 * alpha * s0.theta;
        for y in &sol.states {
            assert!((y[1] - 0.5 * alpha * y[0] - c0).abs() < 1e-9);
        }
    }
}
