//! Projected Newton descent with multiple starts.
//!
//! Bounds are node-wise (`r ≥ ε`, `θ` in a sector), so projection is a
//! clamp. Each iteration splits the variables into an active set (at a bound
//! with the gradient pushing outward) and a free set; the free block gets a
//! damped Newton step from the block-tridiagonal Hessian, the active block a
//! diagonally scaled gradient step, and an Armijo search runs along the
//! projected arc.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parts, BlockTridiag, Closure, DiscretePath};
use crate::phase_plane::check_exponent;
use crate::potential::TrigPolynomial;
use crate::{Error, Result};

/// Radii below this are treated as collisions even without an obstacle.
const R_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop when the projected gradient sup-norm is below `gtol·max(1, |f|)`.
    pub gtol: f64,
    pub armijo: f64,
    /// Number of initial paths; the first is the unperturbed one.
    pub starts: usize,
    pub seed: u64,
    /// Amplitude of the smooth perturbations used for extra starts.
    pub perturbation: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { max_iterations: 400, gtol: 1e-8, armijo: 1e-4, starts: 5, seed: 0x5eed, perturbation: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActiveConstraints {
    /// Nodes on the lower sector wall.
    pub sector_lo: usize,
    pub sector_hi: usize,
    /// Nodes on the obstacle circle.
    pub obstacle: usize,
    pub obstacle_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeReport {
    /// Value of the minimized functional (action or Maupertuis).
    pub action_value: f64,
    pub min_radius: f64,
    pub iterations: usize,
    pub converged: bool,
    pub projected_gradient: f64,
    pub active_constraints: ActiveConstraints,
    /// Index of the start that produced the result.
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Functional {
    Action,
    Maupertuis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bounds {
    r_min: f64,
    sector: Option<(f64, f64)>,
}

impl Bounds {
    fn interval(&self, c: usize) -> (f64, f64) {
        match (c, self.sector) {
            (0, _) => (self.r_min, f64::INFINITY),
            (_, Some((lo, hi))) => (lo, hi),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn clamp(&self, c: usize, v: f64) -> f64 {
        let (lo, hi) = self.interval(c);
        v.max(lo).min(hi)
    }

    fn project(&self, p: &mut DiscretePath, free: &[[bool; 2]]) {
        for i in 0..p.nodes() {
            if free[i][0] {
                p.r[i] = self.clamp(0, p.r[i]);
            }
            if free[i][1] {
                p.theta[i] = self.clamp(1, p.theta[i]);
            }
        }
    }
}

fn get(p: &DiscretePath, i: usize, c: usize) -> f64 {
    if c == 0 {
        p.r[i]
    } else {
        p.theta[i]
    }
}

fn set(p: &mut DiscretePath, i: usize, c: usize, v: f64) {
    if c == 0 {
        p.r[i] = v;
    } else {
        p.theta[i] = v;
    }
}

struct Derivatives {
    value: f64,
    grad: Vec<[f64; 2]>,
    hess: BlockTridiag,
    /// `(a, b)` with the full Hessian `hess + a bᵀ + b aᵀ`.
    rank2: Option<(Vec<[f64; 2]>, Vec<[f64; 2]>)>,
}

fn evaluate(f: Functional, p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<f64> {
    let x = parts(p, u, alpha, 0)?;
    Ok(match f {
        Functional::Action => x.kinetic + x.potential,
        Functional::Maupertuis => x.kinetic * x.potential,
    })
}

fn derivatives(f: Functional, p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<Derivatives> {
    let x = parts(p, u, alpha, 2)?;
    let (Some(mut hk), Some(hp)) = (x.hess_k, x.hess_p) else {
        return Err(Error::InvalidInput("missing Hessian"));
    };
    Ok(match f {
        Functional::Action => {
            hk.add_scaled(&hp, 1.0);
            let grad = x.grad_k.iter().zip(&x.grad_p).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect();
            Derivatives { value: x.kinetic + x.potential, grad, hess: hk, rank2: None }
        }
        Functional::Maupertuis => {
            let (k, v) = (x.kinetic, x.potential);
            let grad = x.grad_k.iter().zip(&x.grad_p).map(|(a, b)| [v * a[0] + k * b[0], v * a[1] + k * b[1]]).collect();
            let mut hess = BlockTridiag::zeros(hk.len(), hk.corner.is_some());
            hess.add_scaled(&hk, v);
            hess.add_scaled(&hp, k);
            Derivatives { value: k * v, grad, hess, rank2: Some((x.grad_k, x.grad_p)) }
        }
    })
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum()
}

fn masked_vec(v: &[[f64; 2]], mask: &[[bool; 2]], sign: f64) -> Vec<[f64; 2]> {
    v.iter()
        .zip(mask)
        .map(|(x, m)| [if m[0] { sign * x[0] } else { 0.0 }, if m[1] { sign * x[1] } else { 0.0 }])
        .collect()
}

/// Damped Newton direction on the variables in `mask`, with the remaining
/// variables displaced by `fixed`.
fn newton_direction(
    d: &Derivatives,
    mask: &[[bool; 2]],
    fixed: &[[f64; 2]],
    damping: f64,
) -> Option<Vec<[f64; 2]>> {
    let m = d.hess.masked(mask, damping);
    let mut coupling = d.hess.matvec(fixed);
    if let Some((a, b)) = &d.rank2 {
        let (ad, bd) = (dot(a, fixed), dot(b, fixed));
        for ((c, x), y) in coupling.iter_mut().zip(a).zip(b) {
            c[0] += x[0] * bd + y[0] * ad;
            c[1] += x[1] * bd + y[1] * ad;
        }
    }
    let full_rhs: Vec<[f64; 2]> = d.grad.iter().zip(&coupling).map(|(g, c)| [g[0] + c[0], g[1] + c[1]]).collect();
    let rhs = masked_vec(&full_rhs, mask, -1.0);
    let xb = m.solve_spd(&rhs)?;
    let free_part: Vec<[f64; 2]> = match &d.rank2 {
        None => xb,
        Some((a, b)) => {
            // Woodbury with W = [a b], C = [[0, 1], [1, 0]].
            let a = masked_vec(a, mask, 1.0);
            let b = masked_vec(b, mask, 1.0);
            let ma = m.solve_spd(&a)?;
            let mb = m.solve_spd(&b)?;
            let s = [[dot(&a, &ma), 1.0 + dot(&a, &mb)], [1.0 + dot(&b, &ma), dot(&b, &mb)]];
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            if !(det.abs() > 1e-300) {
                return None;
            }
            let (ra, rb) = (dot(&a, &xb), dot(&b, &xb));
            let c0 = (s[1][1] * ra - s[0][1] * rb) / det;
            let c1 = (s[0][0] * rb - s[1][0] * ra) / det;
            xb.iter()
                .zip(ma.iter().zip(&mb))
                .map(|(x, (p, q))| [x[0] - c0 * p[0] - c1 * q[0], x[1] - c0 * p[1] - c1 * q[1]])
                .collect()
        }
    };
    let dir: Vec<[f64; 2]> = free_part
        .iter()
        .zip(mask.iter().zip(fixed))
        .map(|(x, (m, f))| [if m[0] { x[0] } else { f[0] }, if m[1] { x[1] } else { f[1] }])
        .collect();
    if dir.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
        return None;
    }
    (dot(&dir, &d.grad) < 0.0 || dir.iter().all(|v| v[0] == 0.0 && v[1] == 0.0)).then_some(dir)
}

fn hess_apply(d: &Derivatives, v: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = d.hess.matvec(v);
    if let Some((a, b)) = &d.rank2 {
        let (av, bv) = (dot(a, v), dot(b, v));
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            o[0] += x[0] * bv + y[0] * av;
            o[1] += x[1] * bv + y[1] * av;
        }
    }
    out
}

/// Newton direction on the box: variables that would leave it are pinned to
/// the bound they hit, pinned variables whose multiplier `(g + H d)` has the
/// wrong sign are released, until the pinned set settles.
fn feasible_direction(
    d: &Derivatives,
    x: &DiscretePath,
    bounds: &Bounds,
    free: &[[bool; 2]],
    mask: &[[bool; 2]],
    fixed: &[[f64; 2]],
    damping: f64,
) -> Option<Vec<[f64; 2]>> {
    let mut mask = mask.to_vec();
    let mut fixed = fixed.to_vec();
    let mut last = None;
    for _ in 0..64 {
        let dir = newton_direction(d, &mask, &fixed, damping)?;
        let mut changed = false;
        for i in 0..mask.len() {
            for c in 0..2 {
                if !mask[i][c] {
                    continue;
                }
                let v = get(x, i, c);
                let (lo, hi) = bounds.interval(c);
                let target = v + dir[i][c];
                if target < lo || target > hi {
                    mask[i][c] = false;
                    fixed[i][c] = if target < lo { lo - v } else { hi - v };
                    changed = true;
                }
            }
        }
        if changed {
            continue;
        }
        last = Some(dir.clone());
        let hd = hess_apply(d, &dir);
        for i in 0..mask.len() {
            for c in 0..2 {
                if mask[i][c] || !free[i][c] {
                    continue;
                }
                let (lo, hi) = bounds.interval(c);
                let target = get(x, i, c) + fixed[i][c];
                let at_lower = (target - lo).abs() <= (hi - target).abs();
                let mu = d.grad[i][c] + hd[i][c];
                if (at_lower && mu < 0.0) || (!at_lower && mu > 0.0) {
                    mask[i][c] = true;
                    fixed[i][c] = 0.0;
                    changed = true;
                }
            }
        }
        if !changed {
            return Some(dir);
        }
    }
    last
}

struct RunStats {
    value: f64,
    iterations: usize,
    converged: bool,
    projected_gradient: f64,
}

fn projected_gradient(p: &DiscretePath, g: &[[f64; 2]], free: &[[bool; 2]], b: &Bounds) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..p.nodes() {
        for c in 0..2 {
            if free[i][c] {
                let x = get(p, i, c);
                m = m.max((x - b.clamp(c, x - g[i][c])).abs());
            }
        }
    }
    m
}

fn check_winding(p: &DiscretePath) -> Result<()> {
    if let Closure::Periodic { winding } = p.closure {
        let found = p.planar_winding();
        if found != winding {
            return Err(Error::WindingChanged { expected: winding, found });
        }
    }
    Ok(())
}

fn run(
    f: Functional,
    mut x: DiscretePath,
    u: &TrigPolynomial,
    alpha: f64,
    bounds: &Bounds,
    free: &[[bool; 2]],
    cfg: &OptimizerConfig,
) -> Result<(DiscretePath, RunStats)> {
    bounds.project(&mut x, free);
    check_winding(&x)?;
    let n = x.nodes();
    let mut lambda = 0.0;
    let mut stats = RunStats { value: evaluate(f, &x, u, alpha)?, iterations: 0, converged: false, projected_gradient: f64::INFINITY };
    for it in 0..=cfg.max_iterations {
        let d = derivatives(f, &x, u, alpha)?;
        stats.value = d.value;
        stats.iterations = it;
        let pg = projected_gradient(&x, &d.grad, free, bounds);
        stats.projected_gradient = pg;
        if pg <= cfg.gtol * d.value.abs().max(1.0) {
            stats.converged = true;
            break;
        }
        if it == cfg.max_iterations {
            break;
        }
        let eps_active = pg.min(1e-3);
        let mut mask = vec![[false; 2]; n];
        let mut fixed = vec![[0.0; 2]; n];
        for i in 0..n {
            for c in 0..2 {
                if !free[i][c] {
                    continue;
                }
                let v = get(&x, i, c);
                let g = d.grad[i][c];
                let (lo, hi) = bounds.interval(c);
                if v - lo <= eps_active && g > 0.0 {
                    fixed[i][c] = lo - v;
                } else if hi - v <= eps_active && g < 0.0 {
                    fixed[i][c] = hi - v;
                } else {
                    mask[i][c] = true;
                }
            }
        }
        let scale = d.hess.diagonal_scale().max(1e-300);
        let mut accepted = false;
        while lambda <= 1e12 {
            let Some(dir) = feasible_direction(&d, &x, bounds, free, &mask, &fixed, lambda * scale) else {
                lambda = if lambda == 0.0 { 1e-8 } else { lambda * 10.0 };
                continue;
            };
            let mut s = 1.0;
            for _ in 0..40 {
                let mut trial = x.clone();
                let mut predicted = 0.0;
                for i in 0..n {
                    for c in 0..2 {
                        if free[i][c] {
                            let v0 = get(&x, i, c);
                            let v1 = bounds.clamp(c, v0 + s * dir[i][c]);
                            set(&mut trial, i, c, v1);
                            predicted += d.grad[i][c] * (v0 - v1);
                        }
                    }
                }
                if check_winding(&trial).is_ok() {
                    if let Ok(ft) = evaluate(f, &trial, u, alpha) {
                        if ft.is_finite()
                            && ft <= d.value - cfg.armijo * predicted.max(0.0) + 1e-15 * d.value.abs()
                        {
                            x = trial;
                            accepted = true;
                            break;
                        }
                    }
                }
                s *= 0.5;
            }
            if accepted {
                if s == 1.0 {
                    lambda = if lambda < 1e-8 { 0.0 } else { lambda * 0.1 };
                }
                break;
            }
            lambda = if lambda == 0.0 { 1e-8 } else { lambda * 10.0 };
        }
        if !accepted {
            break;
        }
    }
    stats.value = evaluate(f, &x, u, alpha)?;
    check_winding(&x)?;
    Ok((x, stats))
}

fn report(p: &DiscretePath, stats: &RunStats, bounds: &Bounds, obstacle: f64, start: usize) -> MinimizeReport {
    let tol = |v: f64| 1e-9 * v.abs().max(1.0);
    let mut active = ActiveConstraints { obstacle_radius: obstacle, ..Default::default() };
    for i in 0..p.nodes() {
        if obstacle > 0.0 && p.r[i] - obstacle <= tol(obstacle) {
            active.obstacle += 1;
        }
        if let Some((lo, hi)) = bounds.sector {
            if p.theta[i] - lo <= tol(lo) {
                active.sector_lo += 1;
            }
            if hi - p.theta[i] <= tol(hi) {
                active.sector_hi += 1;
            }
        }
    }
    MinimizeReport {
        action_value: stats.value,
        min_radius: p.min_radius(),
        iterations: stats.iterations,
        converged: stats.converged,
        projected_gradient: stats.projected_gradient,
        active_constraints: active,
        start,
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth random deformation vanishing at fixed endpoints (open paths) or
/// periodic in the loop parameter.
fn perturbed(p: &DiscretePath, rng: &mut ChaCha8Rng, amplitude: f64) -> DiscretePath {
    let mut q = p.clone();
    let t0 = p.times[0];
    let span = p.duration();
    let periodic = matches!(p.closure, Closure::Periodic { .. });
    let modes: [(f64, f64, f64); 2] = core::array::from_fn(|_| {
        let m = 1.0 + (rng.next_u32() % 3) as f64;
        (m, amplitude * (2.0 * uniform(rng) - 1.0), amplitude * (2.0 * uniform(rng) - 1.0))
    });
    for i in 0..q.nodes() {
        let s = (p.times[i] - t0) / span;
        for &(m, ar, at) in &modes {
            let w = if periodic { (TAU * m * s).sin() } else { (PI * m * s).sin() };
            q.r[i] *= (ar * w).exp();
            q.theta[i] += at * w;
        }
    }
    q
}

fn multistart(
    f: Functional,
    starts: Vec<DiscretePath>,
    u: &TrigPolynomial,
    alpha: f64,
    bounds: &Bounds,
    free: &[[bool; 2]],
    obstacle: f64,
    cfg: &OptimizerConfig,
) -> Result<(DiscretePath, MinimizeReport)> {
    let mut best: Option<(DiscretePath, MinimizeReport)> = None;
    let mut first_err = None;
    for (k, s) in starts.into_iter().enumerate() {
        match run(f, s, u, alpha, bounds, free, cfg) {
            Ok((p, stats)) => {
                let rep = report(&p, &stats, bounds, obstacle, k);
                let better = match &best {
                    None => true,
                    Some((_, b)) => {
                        (rep.converged, -rep.action_value) > (b.converged, -b.action_value)
                    }
                };
                if better {
                    best = Some((p, rep));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::InvalidInput("no starts")))
}

/// Fixed-endpoint, fixed-interval problem with optional sector walls and
/// obstacle `r ≥ ε`. Points are `(r, θ)` with `θ` on the cover.
#[derive(Debug, Clone, PartialEq)]
pub struct BolzaProblem {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub interval: (f64, f64),
    pub segments: usize,
    pub sector: Option<(f64, f64)>,
    pub obstacle: f64,
    pub init: Option<DiscretePath>,
}

impl BolzaProblem {
    pub fn new(start: (f64, f64), end: (f64, f64), interval: (f64, f64)) -> Self {
        BolzaProblem { start, end, interval, segments: 400, sector: None, obstacle: 0.0, init: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.interval.1 > self.interval.0) {
            return Err(Error::InvalidInput("empty time interval"));
        }
        if self.segments < 2 {
            return Err(Error::InvalidInput("need at least two segments"));
        }
        if !(self.obstacle >= 0.0) {
            return Err(Error::InvalidInput("obstacle radius must be non-negative"));
        }
        if !(self.start.0 > 0.0 && self.end.0 > 0.0) {
            return Err(Error::InvalidInput("endpoints must have positive radius"));
        }
        if let Some((lo, hi)) = self.sector {
            let inside = |t: f64| t >= lo && t <= hi;
            if !(hi > lo) || !inside(self.start.1) || !inside(self.end.1) {
                return Err(Error::InvalidInput("endpoints must lie in the closed sector"));
            }
        }
        Ok(())
    }

    fn bounds(&self) -> Bounds {
        Bounds { r_min: self.obstacle.max(R_FLOOR), sector: self.sector }
    }

    /// Straight interpolation of `(r, θ)` between the endpoints.
    pub fn polar_linear(&self) -> Result<DiscretePath> {
        let (a, b) = (self.start, self.end);
        DiscretePath::sample_open(self.interval.0, self.interval.1, self.segments, |s| {
            (a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s)
        })
    }

    /// Like [`Self::polar_linear`] but dipping to the obstacle (or close to
    /// the origin) halfway.
    fn dipping(&self) -> Result<DiscretePath> {
        let (a, b) = (self.start, self.end);
        let floor = if self.obstacle > 0.0 { self.obstacle } else { 1e-2 * a.0.min(b.0) };
        DiscretePath::sample_open(self.interval.0, self.interval.1, self.segments, |s| {
            let r = a.0 + (b.0 - a.0) * s;
            (floor + (r - floor) * (2.0 * s - 1.0).abs(), a.1 + (b.1 - a.1) * s)
        })
    }

    fn starts(&self, cfg: &OptimizerConfig) -> Result<Vec<DiscretePath>> {
        let mut base = vec![match &self.init {
            Some(p) => p.clone(),
            None => self.polar_linear()?,
        }];
        if self.init.is_none() {
            base.push(self.dipping()?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut out = Vec::with_capacity(cfg.starts.max(1));
        for k in 0..cfg.starts.max(1) {
            let b = &base[k % base.len()];
            out.push(if k < base.len() { b.clone() } else { perturbed(b, &mut rng, cfg.perturbation) });
        }
        Ok(out)
    }
}

fn endpoint_mask(p: &DiscretePath) -> Vec<[bool; 2]> {
    let n = p.nodes();
    let mut free = vec![[true; 2]; n];
    if p.fixed_start {
        free[0] = [false; 2];
    }
    if p.fixed_end {
        free[n - 1] = [false; 2];
    }
    free
}

fn solve_open(
    f: Functional,
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    extra: Option<DiscretePath>,
    cfg: &OptimizerConfig,
) -> Result<(DiscretePath, MinimizeReport)> {
    check_exponent(alpha)?;
    problem.validate()?;
    let mut starts = problem.starts(cfg)?;
    for s in &mut starts {
        let n = s.nodes();
        s.r[0] = problem.start.0;
        s.theta[0] = problem.start.1;
        s.r[n - 1] = problem.end.0;
        s.theta[n - 1] = problem.end.1;
    }
    starts.extend(extra);
    let free = endpoint_mask(&starts[0]);
    multistart(f, starts, u, alpha, &problem.bounds(), &free, problem.obstacle, cfg)
}

/// Local minimizer of the discretized action for a Bolza problem, best over
/// the configured starts.
pub fn minimize_bolza(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    cfg: &OptimizerConfig,
) -> Result<(DiscretePath, MinimizeReport)> {
    solve_open(Functional::Action, u, alpha, problem, None, cfg)
}

/// Same problem for the Maupertuis functional on the problem's time grid.
pub fn minimize_maupertuis(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    cfg: &OptimizerConfig,
) -> Result<(DiscretePath, MinimizeReport)> {
    solve_open(Functional::Maupertuis, u, alpha, problem, None, cfg)
}

/// `(J_min, 2√J_min)`: the second entry is what the action minimized over
/// durations should reproduce.
pub fn maupertuis_min(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    cfg: &OptimizerConfig,
) -> Result<(f64, f64)> {
    let (_, rep) = minimize_maupertuis(u, alpha, problem, cfg)?;
    Ok((rep.action_value, 2.0 * rep.action_value.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationScan {
    pub duration: f64,
    pub action: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub path: DiscretePath,
    pub evaluations: usize,
}

/// Minimizes the Bolza value over the interval length by golden section on
/// `ln T`, warm-starting every evaluation from the best path so far.
pub fn min_action_over_duration(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    cfg: &OptimizerConfig,
) -> Result<DurationScan> {
    problem.validate()?;
    let t0 = problem.interval.0;
    let base = problem.interval.1 - t0;
    let (first, _) = minimize_bolza(u, alpha, problem, cfg)?;
    let mut warm = first;
    let mut evaluations = 0usize;
    let warm_cfg = OptimizerConfig { starts: 1, ..*cfg };
    let mut eval = |log_t: f64, warm: &mut DiscretePath| -> Result<f64> {
        evaluations += 1;
        let t = log_t.exp();
        let scale = t / warm.duration();
        let init = warm.retimed(scale, t0 - scale * t0);
        let pb = BolzaProblem { interval: (t0, t0 + t), init: Some(init), ..problem.clone() };
        let (p, rep) = minimize_bolza(u, alpha, &pb, &warm_cfg)?;
        *warm = p;
        Ok(rep.action_value)
    };
    // Bracket a minimum in ln T.
    let mut step = 0.5;
    let (mut a, mut b) = (base.ln() - step, base.ln());
    let mut fa = eval(a, &mut warm)?;
    let mut fb = eval(b, &mut warm)?;
    if fa < fb {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let dir = (b - a).signum();
    let mut c = b + dir * step;
    let mut fc = eval(c, &mut warm)?;
    let mut guard = 0;
    while fc < fb {
        guard += 1;
        if guard > 40 {
            return Err(Error::RootNotBracketed { lo: a.exp(), hi: c.exp() });
        }
        step *= 1.6;
        a = b;
        b = c;
        fb = fc;
        c = b + dir * step;
        fc = eval(c, &mut warm)?;
    }
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = eval(x1, &mut warm)?;
    let mut f2 = eval(x2, &mut warm)?;
    while hi - lo > 1e-5 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1, &mut warm)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2, &mut warm)?;
        }
    }
    let best = 0.5 * (lo + hi);
    let action = eval(best, &mut warm)?;
    let (kinetic, potential) = super::kinetic_potential(&warm, u, alpha)?;
    Ok(DurationScan { duration: best.exp(), action, kinetic, potential, path: warm, evaluations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung {
    pub obstacle: f64,
    pub path: DiscretePath,
    pub report: MinimizeReport,
}

/// Obstacle minimizers over a ladder of radii. Rungs are solved from the
/// largest radius down, each also warm-started from the previous rung, so
/// the returned values are non-decreasing in the radius.
pub fn obstacle_ladder(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    radii: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<LadderRung>> {
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    let mut out: Vec<Option<LadderRung>> = vec![None; radii.len()];
    let mut prev: Option<DiscretePath> = None;
    for &k in &order {
        let pb = BolzaProblem { obstacle: radii[k], ..problem.clone() };
        let (path, report) = solve_open(Functional::Action, u, alpha, &pb, prev.take(), cfg)?;
        prev = Some(path.clone());
        out[k] = Some(LadderRung { obstacle: radii[k], path, report });
    }
    Ok(out.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedValues {
    /// Minimum under `r ≥ ε`.
    pub obstacle: LadderRung,
    /// Minimum under `min r = ε`.
    pub touching: LadderRung,
}

/// The obstacle value `c_ε` and the touching value `c_ε^c` (some node pinned
/// at `r = ε`), cross-seeded so that `c_ε ≤ c_ε^c` holds for the returned
/// local minima.
pub fn constrained_values(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &BolzaProblem,
    eps: f64,
    cfg: &OptimizerConfig,
) -> Result<ConstrainedValues> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("obstacle radius must be positive"));
    }
    let pb = BolzaProblem { obstacle: eps, ..problem.clone() };
    let (opath, orep) = solve_open(Functional::Action, u, alpha, &pb, None, cfg)?;
    let touches = opath.min_radius() <= eps * (1.0 + 1e-9);
    let mut touching: Option<LadderRung> =
        touches.then(|| LadderRung { obstacle: eps, path: opath.clone(), report: orep });
    if touching.is_none() {
        let n = opath.nodes();
        let argmin = (1..n - 1).min_by(|&a, &b| opath.r[a].total_cmp(&opath.r[b])).unwrap_or(1);
        let mut candidates: Vec<usize> = (1..8).map(|k| k * (n - 1) / 8).collect();
        candidates.push(argmin);
        candidates.sort_unstable();
        candidates.dedup();
        let single = OptimizerConfig { starts: 1, ..*cfg };
        let bounds = pb.bounds();
        for j in candidates.into_iter().filter(|&j| j > 0 && j < n - 1) {
            let mut init = opath.clone();
            init.r[j] = eps;
            let mut free = endpoint_mask(&init);
            free[j][0] = false;
            let Ok((p, stats)) = run(Functional::Action, init, u, alpha, &bounds, &free, &single) else {
                continue;
            };
            let rep = report(&p, &stats, &bounds, eps, 0);
            if touching.as_ref().is_none_or(|t| rep.action_value < t.report.action_value) {
                touching = Some(LadderRung { obstacle: eps, path: p, report: rep });
            }
        }
    }
    let touching = touching.ok_or(Error::InvalidInput("no touching candidate converged"))?;
    let mut obstacle = LadderRung { obstacle: eps, path: opath, report: orep };
    if touching.report.action_value < obstacle.report.action_value {
        let single = OptimizerConfig { starts: 1, ..*cfg };
        let (p, r) = solve_open(Functional::Action, u, alpha, &BolzaProblem { init: Some(touching.path.clone()), ..pb }, None, &single)?;
        if r.action_value < obstacle.report.action_value {
            obstacle = LadderRung { obstacle: eps, path: p, report: r };
        }
    }
    Ok(ConstrainedValues { obstacle, touching })
}

/// Fixed-period loops winding `winding` times around the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProblem {
    pub period: f64,
    pub winding: i64,
    pub segments: usize,
    pub obstacle: f64,
    pub init: Option<DiscretePath>,
}

impl PeriodicProblem {
    pub fn new(period: f64, winding: i64) -> Self {
        PeriodicProblem { period, winding, segments: 400, obstacle: 0.0, init: None }
    }

    /// Uniform circle whose radius balances the mean of `U`:
    /// `r^{α+2} = α Ū / ω²`, `ω = 2πk/T`.
    pub fn circle(&self, u: &TrigPolynomial, alpha: f64) -> Result<DiscretePath> {
        let omega = TAU * self.winding as f64 / self.period;
        let r0 = (alpha * u.constant() / (omega * omega)).powf(1.0 / (alpha + 2.0));
        let k = self.winding as f64;
        DiscretePath::sample_periodic(0.0, self.period, self.segments, self.winding, |s| (r0, TAU * k * s))
    }
}

/// Local minimizer of the discretized action over closed loops in a fixed
/// winding class. The class is checked on every trial step; the loop is
/// solved directly on the cover for any `winding ≠ 0`.
pub fn minimize_periodic(
    u: &TrigPolynomial,
    alpha: f64,
    problem: &PeriodicProblem,
    cfg: &OptimizerConfig,
) -> Result<(DiscretePath, MinimizeReport)> {
    check_exponent(alpha)?;
    if problem.winding == 0 {
        return Err(Error::InvalidInput("winding must be nonzero"));
    }
    if !(problem.period > 0.0) || !(problem.obstacle >= 0.0) {
        return Err(Error::InvalidInput("period must be positive and obstacle non-negative"));
    }
    let base = match &problem.init {
        Some(p) => {
            if p.closure != (Closure::Periodic { winding: problem.winding }) {
                return Err(Error::InvalidInput("initial loop has the wrong closure"));
            }
            check_winding(p)?;
            p.clone()
        }
        None => problem.circle(u, alpha)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<DiscretePath> = (0..cfg.starts.max(1))
        .map(|k| if k == 0 { base.clone() } else { perturbed(&base, &mut rng, cfg.perturbation) })
        .collect();
    let bounds = Bounds { r_min: problem.obstacle.max(R_FLOOR), sector: None };
    let free = vec![[true; 2]; base.nodes()];
    multistart(Functional::Action, starts, u, alpha, &bounds, &free, problem.obstacle, cfg)
}
