//! Physical zero-energy trajectories and constrained minimizers.
//!
//! A phase-plane orbit fixes a trajectory up to homothety. Here the
//! representative passes through `r = 1` at its junction point, and the
//! state `[θ, φ, ln r, t, A]` is integrated together so that radius, time
//! and accumulated action come out of one run:
//!
//! ```text
//! (ln r)' = 2U cos(φ−θ),  t' = z r^{1+α/2},  A' = 2U z r^{1−α/2}
//! ```
//!
//! For exponents off the threshold the minimizer under `min r = 1` is no
//! longer smooth. Below `ᾱ` it rests on the unit circle between `θ̂⁻` and
//! `θ̂⁺` (a position jump); above `ᾱ` the arcs meet at an angle `θ₀` where
//! the radial velocity flips sign (a velocity jump).

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::integrator::{self, Crossing, Event, IntegratorConfig};
use crate::manifolds::{graph_phi_of_theta, stable_apsidal, unstable_apsidal, ApsidalResult, ManifoldConfig};
use crate::phase_plane::{check_exponent, vector_field, PhaseState};
use crate::potential::TrigPolynomial;
use crate::threshold::GapSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub integrator: IntegratorConfig,
    pub manifold: ManifoldConfig,
    /// Arcs are truncated where `r` reaches this radius.
    pub r_max: f64,
    /// Largest `|gap|` accepted by [`reconstruct`].
    pub match_tol: f64,
    /// `|gap|` below which a constrained minimizer counts as smooth.
    pub smooth_tol: f64,
    /// Width at which the bisection for `θ₀` switches to residual polishing.
    pub root_tol: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            integrator: IntegratorConfig::default(),
            manifold: ManifoldConfig::default(),
            r_max: 1e4,
            match_tol: 1e-6,
            smooth_tol: 1e-7,
            root_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
    /// `½(ṙ² + r²θ̇²) − U(θ)/r^α`.
    pub energy_residual: f64,
    /// Action accumulated since the junction point (negative before it).
    pub action: f64,
}

impl TrajectorySample {
    pub fn position(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.r * c, self.r * s]
    }
}

/// One arc from the junction radius out to `r_max`, ordered by time.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub samples: Vec<TrajectorySample>,
    /// Action `∫ ½|ẋ|² + V dt` over the arc.
    pub action: f64,
    /// Largest energy residual, including interpolated mid-step points.
    pub energy_residual_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicTrajectory {
    pub alpha: f64,
    pub samples: Vec<TrajectorySample>,
    /// Target asymptotic angles `(θ⁻, θ⁺)`.
    pub asymptotes: (f64, f64),
    /// Index of the first junction sample (`t = 0`, `r = 1`).
    pub pericenter_index: usize,
    pub energy_residual_sup: f64,
    /// `|ṙ(0⁺) − ṙ(0⁻)|` across the junction.
    pub velocity_jump: f64,
    /// Sample range `[start, end]` resting on the unit circle, if any.
    pub circular_range: Option<(usize, usize)>,
    pub action: f64,
}

impl ParabolicTrajectory {
    /// `(r, θ, A)` at time `t` by cubic Hermite interpolation between
    /// samples, `None` outside the sampled window.
    pub fn interpolate(&self, u: &TrigPolynomial, t: f64) -> Option<(f64, f64, f64)> {
        let s = &self.samples;
        let (first, last) = (s.first()?, s.last()?);
        if !(t >= first.t && t <= last.t) {
            return None;
        }
        let k = s.partition_point(|x| x.t <= t).clamp(1, s.len() - 1);
        let (a, b) = (&s[k - 1], &s[k]);
        let h = b.t - a.t;
        if h <= 0.0 {
            return Some((a.r, a.theta, a.action));
        }
        let x = (t - a.t) / h;
        let (x2, x3) = (x * x, x * x * x);
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        let herm = |p0: f64, m0: f64, p1: f64, m1: f64| h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1;
        // Zero energy: the Lagrangian is 2V.
        let lag = |q: &TrajectorySample| 2.0 * u.value(q.theta) * q.r.powf(-self.alpha);
        Some((
            herm(a.r, a.r_dot, b.r, b.r_dot),
            herm(a.theta, a.theta_dot, b.theta, b.theta_dot),
            herm(a.action, lag(a), b.action, lag(b)),
        ))
    }
}

fn energy_residual(u: &TrigPolynomial, alpha: f64, r: f64, theta: f64, r_dot: f64, theta_dot: f64) -> f64 {
    0.5 * (r_dot * r_dot + r * r * theta_dot * theta_dot) - u.value(theta) * r.powf(-alpha)
}

fn arc_field(u: &TrigPolynomial, alpha: f64, y: &[f64; 5]) -> [f64; 5] {
    let [dtheta, dphi] = vector_field(u, alpha, PhaseState::new(y[0], y[1]));
    let uv = u.value(y[0]);
    let z = (2.0 * uv).sqrt();
    let l = y[2];
    [
        dtheta,
        dphi,
        2.0 * uv * (y[1] - y[0]).cos(),
        z * ((1.0 + 0.5 * alpha) * l).exp(),
        2.0 * uv * z * ((1.0 - 0.5 * alpha) * l).exp(),
    ]
}

fn sample_from(u: &TrigPolynomial, alpha: f64, y: &[f64; 5], d: &[f64; 5]) -> TrajectorySample {
    let r = y[2].exp();
    let r_dot = r * d[2] / d[3];
    let theta_dot = d[0] / d[3];
    TrajectorySample {
        t: y[3],
        r,
        theta: y[0],
        phi: y[1],
        r_dot,
        theta_dot,
        energy_residual: energy_residual(u, alpha, r, y[0], r_dot, theta_dot),
        action: y[4],
    }
}

/// Integrates from `start` at `r = 1`, `t = 0`, forward (outgoing) or
/// backward (incoming) in the rescaled time, until `r = r_max`.
pub fn integrate_arc(
    u: &TrigPolynomial,
    alpha: f64,
    start: PhaseState,
    outgoing: bool,
    cfg: &TrajectoryConfig,
) -> Result<Arc> {
    check_exponent(alpha)?;
    if !(cfg.r_max > 1.0) {
        return Err(Error::InvalidInput("truncation radius must exceed 1"));
    }
    let log_max = cfg.r_max.ln();
    let escape = move |_: f64, y: &[f64; 5]| y[2] - log_max;
    let events = [Event::terminal(&escape, Crossing::Rising)];
    let tau_end = if outgoing { 1e4 } else { -1e4 };
    let sol = integrator::integrate(
        |_, y| arc_field(u, alpha, y),
        0.0,
        [start.theta, start.phi, 0.0, 0.0, 0.0],
        tau_end,
        &cfg.integrator,
        &events,
    )?;
    if sol.terminated_by != Some(0) {
        return Err(Error::NoCrossing { theta: sol.last_state()[0] });
    }
    let mut samples: Vec<TrajectorySample> =
        sol.states.iter().zip(&sol.derivs).map(|(y, d)| sample_from(u, alpha, y, d)).collect();
    let mut sup = samples.iter().map(|s| s.energy_residual.abs()).fold(0.0, f64::max);
    for (k, seg) in sol.segments.iter().enumerate() {
        let mid = 0.5 * (sol.taus[k] + sol.taus[k + 1]);
        let s = sample_from(u, alpha, &seg.eval(mid), &seg.eval_derivative(mid));
        sup = sup.max(s.energy_residual.abs());
    }
    let action = sol.last_state()[4].abs();
    if !outgoing {
        samples.reverse();
    }
    Ok(Arc { samples, action, energy_residual_sup: sup })
}

/// Zero-energy motion on the unit circle, `θ̇ = √(2U(θ))`, from `theta_from`
/// to `theta_to > theta_from`, starting at time `t0`.
pub fn circular_arc(
    u: &TrigPolynomial,
    alpha: f64,
    theta_from: f64,
    theta_to: f64,
    t0: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectorySample>> {
    if !(theta_to > theta_from) {
        return Err(Error::InvalidInput("circular arc needs theta_to > theta_from"));
    }
    let stop = move |_: f64, y: &[f64; 2]| y[0] - theta_to;
    let events = [Event::terminal(&stop, Crossing::Rising)];
    // On r = 1 the Lagrangian is 2U.
    let sol = integrator::integrate(
        |_, y: &[f64; 2]| {
            let v = u.value(y[0]);
            [(2.0 * v).sqrt(), 2.0 * v]
        },
        t0,
        [theta_from, 0.0],
        t0 + 1e6,
        cfg,
        &events,
    )?;
    Ok(sol
        .taus
        .iter()
        .zip(&sol.states)
        .map(|(&t, y)| {
            let theta_dot = (2.0 * u.value(y[0])).sqrt();
            TrajectorySample {
                t,
                r: 1.0,
                theta: y[0],
                phi: y[0] + FRAC_PI_2,
                r_dot: 0.0,
                theta_dot,
                energy_residual: energy_residual(u, alpha, 1.0, y[0], 0.0, theta_dot),
                action: y[1],
            }
        })
        .collect())
}

fn join(
    alpha: f64,
    asymptotes: (f64, f64),
    incoming: Arc,
    circle: Option<Vec<TrajectorySample>>,
    outgoing: Arc,
) -> ParabolicTrajectory {
    let pericenter_index = incoming.samples.len() - 1;
    let jump = (outgoing.samples[0].r_dot - incoming.samples[pericenter_index].r_dot).abs();
    let mut sup = incoming.energy_residual_sup.max(outgoing.energy_residual_sup);
    let mut action = incoming.action + outgoing.action;
    let mut samples = incoming.samples;
    let mut shift = 0.0;
    let mut action_shift = 0.0;
    let mut circular_range = None;
    if let Some(circle) = circle {
        sup = circle.iter().map(|s| s.energy_residual.abs()).fold(sup, f64::max);
        action_shift = circle.last().map(|s| s.action).unwrap_or(0.0);
        action += action_shift;
        shift = circle.last().map(|s| s.t).unwrap_or(0.0);
        let start = samples.len();
        // The circle starts where the incoming arc ends.
        samples.extend(circle.into_iter().skip(1));
        circular_range = Some((start - 1, samples.len() - 1));
    }
    samples.extend(outgoing.samples.into_iter().skip(1).map(|mut s| {
        s.t += shift;
        s.action += action_shift;
        s
    }));
    ParabolicTrajectory {
        alpha,
        samples,
        asymptotes,
        pericenter_index,
        energy_residual_sup: sup,
        velocity_jump: jump,
        circular_range,
        action,
    }
}

/// Builds the parabolic trajectory at a matched exponent (`|gap| ≤ match_tol`).
pub fn reconstruct(
    u: &TrigPolynomial,
    alpha: f64,
    theta_minus: f64,
    theta_plus: f64,
    cfg: &TrajectoryConfig,
) -> Result<ParabolicTrajectory> {
    let mcfg = ManifoldConfig { estimate_error: false, ..cfg.manifold };
    let unstable = unstable_apsidal(u, alpha, theta_minus, &mcfg)?;
    let stable = stable_apsidal(u, alpha, theta_plus, &mcfg)?;
    let gap = unstable.theta_hat - stable.theta_hat;
    if gap.abs() > cfg.match_tol {
        return Err(Error::NotMatched { gap });
    }
    reconstruct_from(u, alpha, (theta_minus, theta_plus), unstable.crossing, stable.crossing, cfg)
}

/// Joins the incoming arc through `incoming` and the outgoing arc through
/// `outgoing`, both placed at `r = 1`, `t = 0`.
pub fn reconstruct_from(
    u: &TrigPolynomial,
    alpha: f64,
    asymptotes: (f64, f64),
    incoming: PhaseState,
    outgoing: PhaseState,
    cfg: &TrajectoryConfig,
) -> Result<ParabolicTrajectory> {
    let a = integrate_arc(u, alpha, incoming, false, cfg)?;
    let b = integrate_arc(u, alpha, outgoing, true, cfg)?;
    Ok(join(alpha, asymptotes, a, None, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerKind {
    Smooth,
    PositionJump,
    VelocityJump,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedMinimizer {
    pub alpha: f64,
    pub kind: MinimizerKind,
    pub gap: GapSample,
    pub trajectory: ParabolicTrajectory,
    /// `θ̂⁺ − θ̂⁻` for a position jump, else 0.
    pub delta_pos: f64,
    /// `2√(2U(θ₀)) cos(φ₊(θ₀) − θ₀)` for a velocity jump, else 0.
    pub delta_vel: f64,
    pub theta0: Option<f64>,
    /// `ψ(θ₀)` at the returned root.
    pub psi_residual: Option<f64>,
}

/// `ψ(θ) = φ₊(θ) + φ₋(θ) − 2θ − π`, from the stable (`φ₊`) and unstable
/// (`φ₋`) branches viewed as graphs.
pub fn psi(unstable: &ApsidalResult, stable: &ApsidalResult, theta: f64) -> Result<f64> {
    let m = graph_phi_of_theta(unstable, theta)?.phi;
    let p = graph_phi_of_theta(stable, theta)?.phi;
    Ok(p + m - 2.0 * theta - PI)
}

/// `ψ'(θ) = α + U'/(2U)·[cot(φ₊−θ) + cot(φ₋−θ)] − 2`.
pub fn psi_derivative(u: &TrigPolynomial, unstable: &ApsidalResult, stable: &ApsidalResult, theta: f64) -> Result<f64> {
    let m = graph_phi_of_theta(unstable, theta)?.phi;
    let p = graph_phi_of_theta(stable, theta)?.phi;
    let jet = u.jet(theta);
    let k = jet.d1 / (2.0 * jet.value);
    Ok(unstable.alpha + k * (1.0 / (p - theta).tan() + 1.0 / (m - theta).tan()) - 2.0)
}

/// Root of `ψ` on `(θ̂⁺, θ̂⁻)`: bisection down to `root_tol`, then
/// continued until `|ψ| < 1e-12` or the bracket stops shrinking.
pub fn find_theta0(unstable: &ApsidalResult, stable: &ApsidalResult, root_tol: f64) -> Result<(f64, f64)> {
    let mut lo = stable.theta_hat;
    let mut hi = unstable.theta_hat;
    if !(hi > lo) {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    let p_lo = psi(unstable, stable, lo)?;
    let p_hi = psi(unstable, stable, hi)?;
    if !(p_lo > 0.0 && p_hi < 0.0) {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    let mut best = (0.5 * (lo + hi), f64::INFINITY);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = psi(unstable, stable, mid)?;
        if p.abs() < best.1.abs() {
            best = (mid, p);
        }
        if p > 0.0 {
            lo = mid;
        } else if p < 0.0 {
            hi = mid;
        } else {
            return Ok((mid, 0.0));
        }
        if hi - lo < root_tol && best.1.abs() < 1e-12 {
            break;
        }
    }
    Ok(best)
}

/// The minimizer from `θ⁻` to `θ⁺` under the constraint `min r = 1`.
pub fn constrained_minimizer(
    u: &TrigPolynomial,
    alpha: f64,
    theta_minus: f64,
    theta_plus: f64,
    cfg: &TrajectoryConfig,
) -> Result<ConstrainedMinimizer> {
    let unstable = unstable_apsidal(u, alpha, theta_minus, &cfg.manifold)?;
    let stable = stable_apsidal(u, alpha, theta_plus, &cfg.manifold)?;
    let gap = GapSample {
        alpha,
        theta_hat_minus: unstable.theta_hat,
        theta_hat_plus: stable.theta_hat,
        gap: unstable.theta_hat - stable.theta_hat,
        err: unstable.err_estimate + stable.err_estimate,
    };
    let asymptotes = (theta_minus, theta_plus);
    if gap.gap.abs() < cfg.smooth_tol {
        let trajectory = reconstruct_from(u, alpha, asymptotes, unstable.crossing, stable.crossing, cfg)?;
        return Ok(ConstrainedMinimizer {
            alpha,
            kind: MinimizerKind::Smooth,
            gap,
            trajectory,
            delta_pos: 0.0,
            delta_vel: 0.0,
            theta0: None,
            psi_residual: None,
        });
    }
    if gap.gap < 0.0 {
        let incoming = integrate_arc(u, alpha, unstable.crossing, false, cfg)?;
        let circle = circular_arc(u, alpha, unstable.theta_hat, stable.theta_hat, 0.0, &cfg.integrator)?;
        let outgoing = integrate_arc(u, alpha, stable.crossing, true, cfg)?;
        return Ok(ConstrainedMinimizer {
            alpha,
            kind: MinimizerKind::PositionJump,
            gap,
            trajectory: join(alpha, asymptotes, incoming, Some(circle), outgoing),
            delta_pos: stable.theta_hat - unstable.theta_hat,
            delta_vel: 0.0,
            theta0: None,
            psi_residual: None,
        });
    }
    let (theta0, residual) = find_theta0(&unstable, &stable, cfg.root_tol)?;
    let phi_minus = graph_phi_of_theta(&unstable, theta0)?.phi;
    let phi_plus = graph_phi_of_theta(&stable, theta0)?.phi;
    let trajectory = reconstruct_from(
        u,
        alpha,
        asymptotes,
        PhaseState::new(theta0, phi_minus),
        PhaseState::new(theta0, phi_plus),
        cfg,
    )?;
    let delta_vel = 2.0 * (2.0 * u.value(theta0)).sqrt() * (phi_plus - theta0).cos();
    Ok(ConstrainedMinimizer {
        alpha,
        kind: MinimizerKind::VelocityJump,
        gap,
        trajectory,
        delta_pos: 0.0,
        delta_vel,
        theta0: Some(theta0),
        psi_residual: Some(residual),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitionTolerances {
    pub energy: f64,
    pub asymptote: f64,
    /// Largest accepted jump of `ṙ` at the junction.
    pub velocity_jump: f64,
}

impl Default for DefinitionTolerances {
    fn default() -> Self {
        DefinitionTolerances { energy: 1e-6, asymptote: 1e-3, velocity_jump: 1e-6 }
    }
}

/// Outcome of checking a sampled curve against the definition of a
/// parabolic trajectory on its finite window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitionReport {
    pub min_radius: f64,
    /// `|θ − θ∓|` at the two truncation points.
    pub asymptote_errors: (f64, f64),
    pub energy_residual_sup: f64,
    pub velocity_jump: f64,
    /// Sup of the radial equation residual `|r̈ − rθ̇² + αU r^{−α−1}|`
    /// along any circular rest; zero if there is none.
    pub equation_residual: f64,
    /// Radius at which both ends were truncated.
    pub truncation_radius: f64,
    pub positive_radius: bool,
    pub asymptotes_ok: bool,
    pub energy_ok: bool,
    pub c1_ok: bool,
    pub solves_equations: bool,
}

impl DefinitionReport {
    pub fn passes(&self) -> bool {
        self.positive_radius && self.asymptotes_ok && self.energy_ok && self.c1_ok && self.solves_equations
    }
}

pub fn check_parabolic_definition(
    u: &TrigPolynomial,
    x: &ParabolicTrajectory,
    tol: &DefinitionTolerances,
) -> DefinitionReport {
    let min_radius = x.samples.iter().map(|s| s.r).fold(f64::INFINITY, f64::min);
    let first = x.samples.first();
    let last = x.samples.last();
    let asymptote_errors = match (first, last) {
        (Some(a), Some(b)) => ((a.theta - x.asymptotes.0).abs(), (b.theta - x.asymptotes.1).abs()),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    let truncation_radius = match (first, last) {
        (Some(a), Some(b)) => a.r.min(b.r),
        _ => 0.0,
    };
    let equation_residual = match x.circular_range {
        Some((a, b)) => x.samples[a..=b]
            .iter()
            .map(|s| {
                // r ≡ 1 and r̈ = 0, so the residual is |αU − θ̇²| = (2−α)U.
                (x.alpha * u.value(s.theta) - s.theta_dot * s.theta_dot).abs()
            })
            .fold(0.0, f64::max),
        None => 0.0,
    };
    DefinitionReport {
        min_radius,
        asymptote_errors,
        energy_residual_sup: x.energy_residual_sup,
        velocity_jump: x.velocity_jump,
        equation_residual,
        truncation_radius,
        positive_radius: min_radius > 0.0 && min_radius.is_finite(),
        asymptotes_ok: asymptote_errors.0 < tol.asymptote && asymptote_errors.1 < tol.asymptote,
        energy_ok: x.energy_residual_sup < tol.energy,
        c1_ok: x.velocity_jump < tol.velocity_jump,
        solves_equations: x.circular_range.is_none(),
    }
}
