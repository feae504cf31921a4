//! Apsidal angles of the saddle manifolds.
//!
//! The incoming branch of a parabolic motion is the unstable manifold of the
//! saddle `(θ⁻, θ⁻+π)`; the outgoing branch is the stable manifold of
//! `(θ⁺, θ⁺)`. Each is followed to its first crossing with the pericenter
//! line `v = 0`, and the angle there is the apsidal angle `θ̂∓(α)`.
//!
//! The stable branch is computed as an unstable one: time reversal maps
//! orbits to orbits under `(θ, φ) ↦ (θ, φ+π)`, so the stable manifold of
//! `(θ⁺, θ⁺)` is the reversed image of the `θ`-decreasing unstable branch of
//! `(θ⁺, θ⁺+π)`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::integrator::{Crossing, Event, IntegratorConfig, Solution};
use crate::phase_plane::{check_exponent, integrate_orbit, linearize_saddle, v_value, PhaseState};
use crate::potential::TrigPolynomial;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldConfig {
    pub integrator: IntegratorConfig,
    /// Seed offset is `seed_scale · max(1, |θ*|)` along the eigendirection.
    pub seed_scale: f64,
    /// Re-run at half the seed offset to estimate the error of `θ̂`.
    pub estimate_error: bool,
    /// Extra room beyond the a-priori bound `2π/(2−α)` before giving up.
    pub margin: f64,
    pub max_tau: f64,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            integrator: IntegratorConfig::default(),
            seed_scale: 1e-7,
            estimate_error: true,
            margin: 0.5,
            max_tau: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Leaves `(θ⁻, θ⁻+π)` with `θ` increasing.
    Unstable,
    /// Enters `(θ⁺, θ⁺)` with `θ` increasing.
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSample {
    pub tau: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApsidalResult {
    pub alpha: f64,
    pub branch: Branch,
    /// Base angle of the saddle (`θ⁻` or `θ⁺`).
    pub saddle_angle: f64,
    pub theta_hat: f64,
    pub crossing: PhaseState,
    /// Forward-time samples ordered by increasing `θ`. The unstable polyline
    /// starts at the seed and ends at the crossing, the stable one the
    /// other way around.
    pub polyline: Vec<OrbitSample>,
    pub err_estimate: f64,
    pub seed_offset: f64,
    /// Slope `v₂` of the seeding eigendirection.
    pub seed_slope: f64,
    /// Integration of the (possibly reversed) branch, in its own time.
    pub(crate) solution: Solution<2>,
}

struct RawBranch {
    theta_hat: f64,
    crossing: PhaseState,
    solution: Solution<2>,
    slope: f64,
}

/// Follows the unstable manifold of `(θ*, θ*+π)` in the direction
/// `sign·(1, v₂)` until `v` rises to zero.
fn shoot(
    u: &TrigPolynomial,
    alpha: f64,
    theta_star: f64,
    sign: f64,
    delta: f64,
    cfg: &ManifoldConfig,
) -> Result<RawBranch> {
    let lin = linearize_saddle(u, alpha, theta_star, 1)?;
    let seed = PhaseState::new(
        theta_star + sign * delta * lin.direction[0],
        theta_star + PI + sign * delta * lin.direction[1],
    );
    let limit = 2.0 * PI / (2.0 - alpha) + cfg.margin;
    let v_event = |_: f64, y: &[f64; 2]| v_value(u, PhaseState::new(y[0], y[1]));
    let escape = move |_: f64, y: &[f64; 2]| sign * (y[0] - theta_star) - limit;
    let events = [
        Event::terminal(&v_event, Crossing::Rising),
        Event::terminal(&escape, Crossing::Rising),
    ];
    let solution = integrate_orbit(u, alpha, seed, 0.0, cfg.max_tau, &cfg.integrator, &events)?;
    let last = *solution.last_state();
    if solution.terminated_by != Some(0) {
        return Err(Error::NoCrossing { theta: last[0] });
    }
    Ok(RawBranch {
        theta_hat: last[0],
        crossing: PhaseState::new(last[0], last[1]),
        solution,
        slope: lin.slope,
    })
}

fn seed_offset(theta_star: f64, cfg: &ManifoldConfig) -> f64 {
    cfg.seed_scale * theta_star.abs().max(1.0)
}

fn error_estimate(theta_hat: f64, rerun: Option<f64>, cfg: &ManifoldConfig) -> f64 {
    let floor = cfg.integrator.rel_tol * theta_hat.abs().max(1.0);
    match rerun {
        Some(t) => (theta_hat - t).abs() + floor,
        None => floor,
    }
}

/// `θ̂⁻(α)`: first pericenter crossing of the unstable manifold of `(θ⁻, θ⁻+π)`.
pub fn unstable_apsidal(
    u: &TrigPolynomial,
    alpha: f64,
    theta_minus: f64,
    cfg: &ManifoldConfig,
) -> Result<ApsidalResult> {
    check_exponent(alpha)?;
    let delta = seed_offset(theta_minus, cfg);
    let raw = shoot(u, alpha, theta_minus, 1.0, delta, cfg)?;
    let rerun = if cfg.estimate_error {
        Some(shoot(u, alpha, theta_minus, 1.0, 0.5 * delta, cfg)?.theta_hat)
    } else {
        None
    };
    let polyline = raw
        .solution
        .taus
        .iter()
        .zip(&raw.solution.states)
        .map(|(&tau, y)| OrbitSample { tau, theta: y[0], phi: y[1] })
        .collect();
    Ok(ApsidalResult {
        alpha,
        branch: Branch::Unstable,
        saddle_angle: theta_minus,
        theta_hat: raw.theta_hat,
        crossing: raw.crossing,
        polyline,
        err_estimate: error_estimate(raw.theta_hat, rerun, cfg),
        seed_offset: delta,
        seed_slope: raw.slope,
        solution: raw.solution,
    })
}

/// `θ̂⁺(α)`: last pericenter crossing of the stable manifold of `(θ⁺, θ⁺)`.
pub fn stable_apsidal(
    u: &TrigPolynomial,
    alpha: f64,
    theta_plus: f64,
    cfg: &ManifoldConfig,
) -> Result<ApsidalResult> {
    check_exponent(alpha)?;
    let delta = seed_offset(theta_plus, cfg);
    let raw = shoot(u, alpha, theta_plus, -1.0, delta, cfg)?;
    let rerun = if cfg.estimate_error {
        Some(shoot(u, alpha, theta_plus, -1.0, 0.5 * delta, cfg)?.theta_hat)
    } else {
        None
    };
    let polyline = raw
        .solution
        .taus
        .iter()
        .zip(&raw.solution.states)
        .rev()
        .map(|(&sigma, y)| OrbitSample { tau: -sigma, theta: y[0], phi: y[1] - PI })
        .collect();
    Ok(ApsidalResult {
        alpha,
        branch: Branch::Stable,
        saddle_angle: theta_plus,
        theta_hat: raw.theta_hat,
        crossing: PhaseState::new(raw.crossing.theta, raw.crossing.phi - PI),
        polyline,
        err_estimate: error_estimate(raw.theta_hat, rerun, cfg),
        seed_offset: delta,
        seed_slope: raw.slope,
        solution: raw.solution,
    })
}

/// A point of the manifold viewed as a graph `φ = φ_α(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub phi: f64,
    /// `dφ/dθ`.
    pub slope: f64,
}

impl ApsidalResult {
    /// `θ`-interval on which [`graph_phi_of_theta`] is defined.
    pub fn graph_domain(&self) -> (f64, f64) {
        match self.branch {
            Branch::Unstable => (self.saddle_angle, self.theta_hat),
            Branch::Stable => (self.theta_hat, self.saddle_angle),
        }
    }

    fn phi_shift(&self) -> f64 {
        match self.branch {
            Branch::Unstable => 0.0,
            Branch::Stable => -PI,
        }
    }
}

/// Evaluates the branch as a graph over `θ` by inverting `θ(τ)` on the
/// integrator's continuous output. Between the saddle and the seed the
/// linear eigendirection is used.
pub fn graph_phi_of_theta(branch: &ApsidalResult, theta: f64) -> Result<GraphPoint> {
    let (lo, hi) = branch.graph_domain();
    if !(theta >= lo && theta <= hi) {
        return Err(Error::OutsideGraphDomain { theta, lo, hi });
    }
    let sol = &branch.solution;
    let first = sol.states[0][0];
    let base_phi = branch.saddle_angle + PI + branch.phi_shift();
    // Along the integration `θ` moves away from the saddle: s = ±(θ − θ*) grows.
    let sign = match branch.branch {
        Branch::Unstable => 1.0,
        Branch::Stable => -1.0,
    };
    let dist = sign * (theta - branch.saddle_angle);
    if dist <= sign * (first - branch.saddle_angle) {
        return Ok(GraphPoint {
            phi: base_phi + branch.seed_slope * (theta - branch.saddle_angle),
            slope: branch.seed_slope,
        });
    }
    let idx = sol.states.partition_point(|y| sign * (y[0] - branch.saddle_angle) < dist);
    let k = idx.saturating_sub(1).min(sol.segments.len() - 1);
    let seg = &sol.segments[k];
    let (mut a, mut b) = (sol.taus[k], sol.taus[k + 1]);
    let g = |tau: f64| seg.eval(tau)[0] - theta;
    let (mut ga, mut gb) = (sol.states[k][0] - theta, sol.states[k + 1][0] - theta);
    if ga == 0.0 {
        b = a;
    } else if gb != 0.0 {
        if ga * gb > 0.0 {
            return Err(Error::OutsideGraphDomain { theta, lo, hi });
        }
        let mut side = 0i8;
        for _ in 0..100 {
            let c = (a * gb - b * ga) / (gb - ga);
            let gc = g(c);
            if gc == 0.0 {
                b = c;
                break;
            }
            if gc * gb < 0.0 {
                a = b;
                ga = gb;
                side = 0;
            } else {
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
            b = c;
            gb = gc;
            if (b - a).abs() <= 1e-15 * b.abs().max(1.0) || gb.abs() <= 1e-15 * theta.abs().max(1.0) {
                break;
            }
        }
    }
    let tau = b;
    let y = seg.eval(tau);
    let d = seg.eval_derivative(tau);
    Ok(GraphPoint { phi: y[1] + branch.phi_shift(), slope: d[1] / d[0] })
}

/// Residual of `dφ/dθ = α/2 + U'/(2U) cot(φ − θ)` at a graph point.
pub fn graph_residual(u: &TrigPolynomial, alpha: f64, theta: f64, p: GraphPoint) -> f64 {
    let jet = u.jet(theta);
    let rhs = 0.5 * alpha + jet.d1 / (2.0 * jet.value) / (p.phi - theta).tan();
    p.slope - rhs
}

/// Pericenter line through a crossing: `φ = θ + π/2`.
pub fn pericenter_phi(theta: f64) -> f64 {
    theta + FRAC_PI_2
}
