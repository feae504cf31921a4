//! Second-variation probe along homothetic rays, plus small diagnostics:
//! asymptotic log-slopes, blow-up rescaling, collision trends and the
//! admissibility check for perturbations of the potential.
//!
//! In the variables `ρ = r^{(2−α)/4}` and the time `τ = ∫ r^{−(2+α)/2} dt`,
//! the Maupertuis functional splits as `J = F·G` with `G = ∫ρ²U(θ) dτ`.
//! Along the ray `θ ≡ θ̄` one has `ρ = e^{γτ}`, `γ = √((2−α)²U(θ̄)/8)`,
//! and an angular variation `(0, ξ)` vanishing at both ends gives
//!
//! ```text
//! d²J = G · ∫ρ²(ξ'² + U''ξ²) − 2(∫ρ²U'ξ)².
//! ```

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::DiscretePath;
use crate::integrator::{self, Crossing, Event, IntegratorConfig};
use crate::phase_plane::{check_exponent, PhaseState};
use crate::potential::{too_strict_test, TrigPolynomial};
use crate::trajectory::TrajectorySample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// Largest `τ`-length searched for a zero of the test function.
    pub window: f64,
    /// The `ε` in `(ρ²ξ')' = (μ + 2ε)ρ²ξ`.
    pub eps_margin: f64,
    pub integrator: IntegratorConfig,
    /// Simpson nodes for the fallback bump.
    pub bump_points: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { window: 40.0, eps_margin: 1e-2, integrator: IntegratorConfig::default(), bump_points: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeFamily {
    /// `ξ` solves the comparison equation from `ξ(0) = 0` to its next zero.
    Oscillatory { zero: f64 },
    /// No zero within the window; `ξ = sin(πτ/L)` on `[0, L]` instead.
    Bump { length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    /// `d²J[(0, ξ), (0, ξ)]`.
    pub value: f64,
    pub family: ProbeFamily,
    pub gamma: f64,
    /// `U''(θ̄)`.
    pub mu: f64,
    pub too_strict: bool,
    /// `∫ρ²ξ²`, for normalizing `value`.
    pub weighted_norm: f64,
}

/// `γ = √((2−α)² U(θ̄) / 8)`.
pub fn ray_slope_limit(u: &TrigPolynomial, alpha: f64, theta_bar: f64) -> f64 {
    ((2.0 - alpha) * (2.0 - alpha) * u.value(theta_bar) / 8.0).sqrt()
}

/// `d ln ρ / dτ` at a phase-plane state: `(2−α)√U cos(φ−θ) / (2√2)`.
pub fn ray_log_slope(u: &TrigPolynomial, alpha: f64, s: PhaseState) -> f64 {
    (2.0 - alpha) * u.value(s.theta).sqrt() * s.delta().cos() / (2.0 * 2f64.sqrt())
}

/// `d ln ρ / dτ` from a physical sample: `(2−α)/4 · ṙ · r^{α/2}`.
pub fn trajectory_log_slope(alpha: f64, s: &TrajectorySample) -> f64 {
    0.25 * (2.0 - alpha) * s.r_dot * s.r.powf(0.5 * alpha)
}

pub fn second_variation_probe(
    u: &TrigPolynomial,
    alpha: f64,
    theta_bar: f64,
    cfg: &ProbeConfig,
) -> Result<ProbeResult> {
    let too_strict = too_strict_test(u, theta_bar, alpha)?;
    if !(cfg.window > 0.0 && cfg.eps_margin > 0.0 && cfg.bump_points >= 4) {
        return Err(Error::InvalidInput("probe window, margin and bump resolution must be positive"));
    }
    let jet = u.jet(theta_bar);
    let gamma = ray_slope_limit(u, alpha, theta_bar);
    let mu = jet.d2;
    let k = mu + 2.0 * cfg.eps_margin;
    // State: ξ, ξ', ∫ρ²U, ∫ρ²(ξ'²+U''ξ²), ∫ρ²U'ξ, ∫ρ²ξ².
    let field = |tau: f64, y: &[f64; 6]| {
        let w = (2.0 * gamma * tau).exp();
        [
            y[1],
            -2.0 * gamma * y[1] + k * y[0],
            w * jet.value,
            w * (y[1] * y[1] + jet.d2 * y[0] * y[0]),
            w * jet.d1 * y[0],
            w * y[0] * y[0],
        ]
    };
    let zero = |_: f64, y: &[f64; 6]| y[0];
    let events = [Event::terminal(&zero, Crossing::Falling)];
    let sol = integrator::integrate(field, 0.0, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0], cfg.window, &cfg.integrator, &events)?;
    if sol.terminated_by == Some(0) {
        let y = sol.last_state();
        return Ok(ProbeResult {
            value: y[2] * y[3] - 2.0 * y[4] * y[4],
            family: ProbeFamily::Oscillatory { zero: sol.last_tau() },
            gamma,
            mu,
            too_strict,
            weighted_norm: y[5],
        });
    }
    let len = cfg.window;
    let n = cfg.bump_points + cfg.bump_points % 2;
    let h = len / n as f64;
    let (mut g, mut q, mut l, mut nn) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..=n {
        let tau = i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 } * h / 3.0;
        let rho2 = (2.0 * gamma * tau).exp();
        let (s, c) = (core::f64::consts::PI * tau / len).sin_cos();
        let xi = s;
        let dxi = core::f64::consts::PI / len * c;
        g += w * rho2 * jet.value;
        q += w * rho2 * (dxi * dxi + jet.d2 * xi * xi);
        l += w * rho2 * jet.d1 * xi;
        nn += w * rho2 * xi * xi;
    }
    Ok(ProbeResult {
        value: g * q - 2.0 * l * l,
        family: ProbeFamily::Bump { length: len },
        gamma,
        mu,
        too_strict,
        weighted_norm: nn,
    })
}

/// `x̂(s) = x(ε^{(2+α)/2} s)/ε`: radii divided by `ε`, times multiplied by
/// `ε^{−(2+α)/2}`. Solutions map to solutions.
pub fn blow_up(p: &DiscretePath, alpha: f64, eps: f64) -> Result<DiscretePath> {
    check_exponent(alpha)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("blow-up scale must be positive"));
    }
    let ts = eps.powf(-0.5 * (2.0 + alpha));
    let mut q = p.retimed(ts, 0.0);
    for r in &mut q.r {
        *r /= eps;
    }
    Ok(q)
}

/// Factor `ε^{−(2−α)/2}` with `A(x̂) = factor · A(x)` under [`blow_up`].
pub fn blow_up_action_factor(alpha: f64, eps: f64) -> f64 {
    eps.powf(-0.5 * (2.0 - alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionTrend {
    /// Least-squares slope of `ln min_radius` against `ln ε`.
    pub slope: f64,
    /// `min_radius / ε` per rung.
    pub ratios: Vec<f64>,
    /// Relative change of `min_radius` between the two smallest `ε`.
    pub last_change: f64,
    /// Heuristic verdict: the minimum radius follows the obstacle down.
    pub colliding: bool,
}

/// Reads a collision trend off obstacle minimizers at radii `eps`.
pub fn collision_trend(eps: &[f64], min_radius: &[f64]) -> Result<CollisionTrend> {
    if eps.len() != min_radius.len() || eps.len() < 2 {
        return Err(Error::InvalidInput("need at least two matching rungs"));
    }
    if eps.iter().chain(min_radius).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive"));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = min_radius.iter().map(|r| r.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[a].total_cmp(&eps[b]));
    let (a, b) = (min_radius[order[0]], min_radius[order[1]]);
    Ok(CollisionTrend {
        slope,
        ratios: eps.iter().zip(min_radius).map(|(e, r)| r / e).collect(),
        last_change: (a - b).abs() / b,
        colliding: slope > 0.5,
    })
}

/// Sampled bound `sup_{|x| = radius} |W|` and `sup |∇W|` for a perturbation
/// `W` of the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationBound {
    pub radius: f64,
    pub w_sup: f64,
    pub grad_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationCheck {
    /// `0 ≤ α' < α`.
    pub exponent_ok: bool,
    /// `r^{α'}(|W| + r|∇W|)` per sample, ordered by increasing radius.
    pub weighted: Vec<f64>,
    /// The weighted values shrink as `r` decreases and end below `tol`.
    pub decay_ok: bool,
}

impl PerturbationCheck {
    pub fn passes(&self) -> bool {
        self.exponent_ok && self.decay_ok
    }
}

/// Checks `r^{α'}(W + r|∇W|) → 0` as `r → 0` on sampled bounds, the
/// condition under which `W` does not change the collision analysis of a
/// `−α`-homogeneous potential.
pub fn check_perturbation(
    alpha: f64,
    alpha_prime: f64,
    bounds: &[PerturbationBound],
    tol: f64,
) -> Result<PerturbationCheck> {
    check_exponent(alpha)?;
    if bounds.is_empty() || bounds.iter().any(|b| !(b.radius > 0.0 && b.w_sup >= 0.0 && b.grad_sup >= 0.0)) {
        return Err(Error::InvalidInput("bounds need positive radii and non-negative sups"));
    }
    let mut sorted = bounds.to_vec();
    sorted.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let weighted: Vec<f64> =
        sorted.iter().map(|b| b.radius.powf(alpha_prime) * (b.w_sup + b.radius * b.grad_sup)).collect();
    let shrinking = weighted.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12));
    Ok(PerturbationCheck {
        exponent_ok: alpha_prime >= 0.0 && alpha_prime < alpha,
        decay_ok: shrinking && weighted[0] <= tol,
        weighted,
    })
}
