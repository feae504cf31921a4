//! Direct minimization of discretized action and Maupertuis functionals.
//!
//! Paths are sampled on a time grid in polar coordinates on the universal
//! cover. On a segment of length `h` between nodes `(r₁, θ₁)` and `(r₂, θ₂)`
//! the kinetic term is that of the straight chord,
//!
//! ```text
//! (r₁² + r₂² − 2 r₁ r₂ cos(θ₂ − θ₁)) / 2h
//! ```
//!
//! and the potential `V = U(θ)/r^α` is integrated by the trapezoid rule.
//! The chord form makes the discrete functionals exactly invariant under
//! rotations and keeps a polygonal reading of every path, which is what
//! the winding checks use.

mod banded;
mod minimize;
mod probe;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;

use crate::phase_plane::check_exponent;
use crate::potential::TrigPolynomial;
use crate::{Error, Result};

pub use banded::{Block, BlockTridiag};
pub use minimize::{
    constrained_values, maupertuis_min, minimize_bolza, minimize_maupertuis, minimize_periodic, obstacle_ladder,
    min_action_over_duration, ActiveConstraints, BolzaProblem, ConstrainedValues, DurationScan, LadderRung,
    MinimizeReport, OptimizerConfig, PeriodicProblem,
};
pub use probe::{
    blow_up, blow_up_action_factor, check_perturbation, collision_trend, ray_log_slope, ray_slope_limit,
    second_variation_probe, trajectory_log_slope, CollisionTrend, PerturbationBound, PerturbationCheck,
    ProbeConfig, ProbeFamily, ProbeResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    Open,
    /// Closed loop with `θ` advancing by `2π·winding` over one period.
    Periodic { winding: i64 },
}

/// A path sampled at `times`, nodes in polar coordinates on the cover.
///
/// Open paths have one time per node. Periodic paths carry one extra time,
/// the end of the period, and the last segment joins the last node to the
/// first one shifted by `2π·winding`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub fixed_start: bool,
    pub fixed_end: bool,
    pub closure: Closure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    a: usize,
    b: usize,
    h: f64,
    r1: f64,
    r2: f64,
    th1: f64,
    th2: f64,
}

impl DiscretePath {
    /// Open path with both endpoints fixed.
    pub fn open(times: Vec<f64>, r: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let p = DiscretePath { times, r, theta, fixed_start: true, fixed_end: true, closure: Closure::Open };
        p.validate()?;
        Ok(p)
    }

    /// Open path on `segments` uniform steps of `[t0, t1]`, nodes from `f(s)`
    /// with `s ∈ [0, 1]` returning `(r, θ)`.
    pub fn sample_open(t0: f64, t1: f64, segments: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (times, r, theta) = sample(t0, t1, segments, segments + 1, f);
        Self::open(times, r, theta)
    }

    /// Closed loop over `[t0, t0 + period]` with `segments` uniform steps.
    /// `f(s)` for `s ∈ [0, 1)` must advance `θ` by `2π·winding` as `s → 1`.
    pub fn sample_periodic(
        t0: f64,
        period: f64,
        segments: usize,
        winding: i64,
        f: impl Fn(f64) -> (f64, f64),
    ) -> Result<Self> {
        let (times, r, theta) = sample(t0, t0 + period, segments, segments, f);
        let p = DiscretePath {
            times,
            r,
            theta,
            fixed_start: false,
            fixed_end: false,
            closure: Closure::Periodic { winding },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.r.len();
        if self.theta.len() != n {
            return Err(Error::InvalidInput("r and theta lengths differ"));
        }
        let expected = match self.closure {
            Closure::Open => n,
            Closure::Periodic { .. } => n + 1,
        };
        if self.times.len() != expected {
            return Err(Error::InvalidInput("time grid length does not match the nodes"));
        }
        let min_nodes = match self.closure {
            Closure::Open => 2,
            Closure::Periodic { winding } => {
                if winding == 0 {
                    return Err(Error::InvalidInput("periodic path needs nonzero winding"));
                }
                3
            }
        };
        if n < min_nodes {
            return Err(Error::InvalidInput("too few nodes"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) || self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("times must be finite and strictly increasing"));
        }
        if self.r.iter().chain(&self.theta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite node"));
        }
        Ok(())
    }

    pub fn nodes(&self) -> usize {
        self.r.len()
    }

    pub fn segments(&self) -> usize {
        match self.closure {
            Closure::Open => self.nodes() - 1,
            Closure::Periodic { .. } => self.nodes(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    fn shift(&self) -> f64 {
        match self.closure {
            Closure::Open => 0.0,
            Closure::Periodic { winding } => TAU * winding as f64,
        }
    }

    fn segment(&self, j: usize) -> Segment {
        let n = self.nodes();
        let b = (j + 1) % n;
        let th2 = if b == 0 { self.theta[0] + self.shift() } else { self.theta[b] };
        Segment {
            a: j,
            b,
            h: self.times[j + 1] - self.times[j],
            r1: self.r[j],
            r2: self.r[b],
            th1: self.theta[j],
            th2,
        }
    }

    /// Trapezoid weight of node `i`.
    fn weight(&self, i: usize) -> f64 {
        let n = self.nodes();
        let seg = |j: usize| self.times[j + 1] - self.times[j];
        match self.closure {
            Closure::Open => {
                let left = if i > 0 { seg(i - 1) } else { 0.0 };
                let right = if i + 1 < n { seg(i) } else { 0.0 };
                0.5 * (left + right)
            }
            Closure::Periodic { .. } => 0.5 * (seg((i + n - 1) % n) + seg(i)),
        }
    }

    pub fn min_radius(&self) -> f64 {
        self.r.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.r
            .iter()
            .zip(&self.theta)
            .map(|(&r, &t)| {
                let (s, c) = t.sin_cos();
                [r * c, r * s]
            })
            .collect()
    }

    /// Winding number of the closed polygon around the origin, from the
    /// planar angle increments of its chords.
    pub fn planar_winding(&self) -> i64 {
        let total: f64 = (0..self.segments())
            .map(|j| {
                let s = self.segment(j);
                crate::potential::wrap_pi(s.th2 - s.th1)
            })
            .sum();
        (total / TAU).round() as i64
    }

    /// Path with times mapped by `t ↦ scale·t + offset`.
    pub fn retimed(&self, scale: f64, offset: f64) -> DiscretePath {
        let mut p = self.clone();
        for t in &mut p.times {
            *t = scale * *t + offset;
        }
        p
    }

    fn check_radii(&self) -> Result<()> {
        match self.r.iter().position(|&r| !(r > 0.0)) {
            Some(node) => Err(Error::Collision { node }),
            None => Ok(()),
        }
    }
}

fn sample(
    t0: f64,
    t1: f64,
    segments: usize,
    nodes: usize,
    f: impl Fn(f64) -> (f64, f64),
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let segments = segments.max(1);
    let times: Vec<f64> =
        (0..=segments).map(|i| if i == segments { t1 } else { t0 + (t1 - t0) * i as f64 / segments as f64 }).collect();
    let (r, theta) = (0..nodes).map(|i| f(i as f64 / segments as f64)).unzip();
    (times, r, theta)
}

/// Kinetic and potential integrals with their derivatives.
struct Parts {
    kinetic: f64,
    potential: f64,
    grad_k: Vec<[f64; 2]>,
    grad_p: Vec<[f64; 2]>,
    hess_k: Option<BlockTridiag>,
    hess_p: Option<BlockTridiag>,
}

fn kinetic_segment(s: &Segment) -> f64 {
    (s.r1 * s.r1 + s.r2 * s.r2 - 2.0 * s.r1 * s.r2 * (s.th2 - s.th1).cos()) / (2.0 * s.h)
}

fn parts(p: &DiscretePath, u: &TrigPolynomial, alpha: f64, order: u8) -> Result<Parts> {
    check_exponent(alpha)?;
    p.validate()?;
    p.check_radii()?;
    let n = p.nodes();
    let cyclic = matches!(p.closure, Closure::Periodic { .. });
    let mut out = Parts {
        kinetic: 0.0,
        potential: 0.0,
        grad_k: vec![[0.0; 2]; if order >= 1 { n } else { 0 }],
        grad_p: vec![[0.0; 2]; if order >= 1 { n } else { 0 }],
        hess_k: (order >= 2).then(|| BlockTridiag::zeros(n, cyclic && n >= 3)),
        hess_p: (order >= 2).then(|| BlockTridiag::zeros(n, cyclic && n >= 3)),
    };
    for j in 0..p.segments() {
        let s = p.segment(j);
        out.kinetic += kinetic_segment(&s);
        if order == 0 {
            continue;
        }
        let (sn, cs) = (s.th2 - s.th1).sin_cos();
        let ih = 1.0 / s.h;
        let g = &mut out.grad_k;
        g[s.a][0] += (s.r1 - s.r2 * cs) * ih;
        g[s.b][0] += (s.r2 - s.r1 * cs) * ih;
        g[s.a][1] -= s.r1 * s.r2 * sn * ih;
        g[s.b][1] += s.r1 * s.r2 * sn * ih;
        if let Some(hk) = out.hess_k.as_mut() {
            let tt = s.r1 * s.r2 * cs * ih;
            let da = [[ih, -s.r2 * sn * ih], [-s.r2 * sn * ih, tt]];
            let db = [[ih, s.r1 * sn * ih], [s.r1 * sn * ih, tt]];
            // Rows: (r₁, θ₁) at node a; columns: (r₂, θ₂) at node b.
            let cross = [[-cs * ih, s.r2 * sn * ih], [-s.r1 * sn * ih, -tt]];
            add_block(&mut hk.diag[s.a], &da);
            add_block(&mut hk.diag[s.b], &db);
            if s.b == s.a + 1 {
                add_block(&mut hk.upper[s.a], &cross);
            } else if let Some(c) = hk.corner.as_mut() {
                add_block(c, &banded::transpose(&cross));
            }
        }
    }
    for i in 0..n {
        let w = p.weight(i);
        let jet = u.jet(p.theta[i]);
        let r = p.r[i];
        let ra = r.powf(-alpha);
        out.potential += w * jet.value * ra;
        if order == 0 {
            continue;
        }
        out.grad_p[i][0] += w * (-alpha * jet.value * ra / r);
        out.grad_p[i][1] += w * jet.d1 * ra;
        if let Some(hp) = out.hess_p.as_mut() {
            let rr = alpha * (alpha + 1.0) * jet.value * ra / (r * r);
            let rt = -alpha * jet.d1 * ra / r;
            let tt = jet.d2 * ra;
            add_block(&mut hp.diag[i], &[[w * rr, w * rt], [w * rt, w * tt]]);
        }
    }
    Ok(out)
}

fn add_block(a: &mut Block, b: &Block) {
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] += b[i][j];
        }
    }
}

/// `(∫½|ẋ|² dt, ∫V dt)` of the discretized path.
pub fn kinetic_potential(p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<(f64, f64)> {
    let x = parts(p, u, alpha, 0)?;
    Ok((x.kinetic, x.potential))
}

/// Discretized action `∫ ½|ẋ|² + V dt`.
pub fn action(p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<f64> {
    let (k, v) = kinetic_potential(p, u, alpha)?;
    Ok(k + v)
}

/// Discretized Maupertuis functional `∫½|ẋ|² dt · ∫V dt`.
pub fn maupertuis(p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<f64> {
    let (k, v) = kinetic_potential(p, u, alpha)?;
    Ok(k * v)
}

/// Gradient of [`action`] with respect to `(r_i, θ_i)`.
pub fn action_gradient(p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<Vec<[f64; 2]>> {
    let x = parts(p, u, alpha, 1)?;
    Ok(x.grad_k.iter().zip(&x.grad_p).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect())
}

/// Gradient of [`maupertuis`]: `P∇K + K∇P`.
pub fn maupertuis_gradient(p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<Vec<[f64; 2]>> {
    let x = parts(p, u, alpha, 1)?;
    Ok(x.grad_k
        .iter()
        .zip(&x.grad_p)
        .map(|(a, b)| [x.potential * a[0] + x.kinetic * b[0], x.potential * a[1] + x.kinetic * b[1]])
        .collect())
}

/// Hessian of [`action`] in block form.
pub fn action_hessian(p: &DiscretePath, u: &TrigPolynomial, alpha: f64) -> Result<BlockTridiag> {
    let x = parts(p, u, alpha, 2)?;
    let mut h = x.hess_k.unwrap_or_else(|| BlockTridiag::zeros(0, false));
    if let Some(hp) = &x.hess_p {
        h.add_scaled(hp, 1.0);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};

    fn fig2() -> TrigPolynomial {
        TrigPolynomial::new(2.0, vec![0.0, -1.0], vec![])
    }

    fn random_smooth_path(seed: u64, n: usize) -> DiscretePath {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let a: [f64; 3] = core::array::from_fn(|_| rng.random_range(-0.3..0.3));
        let b: [f64; 3] = core::array::from_fn(|_| rng.random_range(-0.3..0.3));
        DiscretePath::sample_open(0.0, 2.0, n, |s| {
            let r = 1.5 + a[0] * (PI * s).sin() + a[1] * (2.0 * PI * s).sin() + a[2] * s;
            let th = 0.3 + 2.0 * s + b[0] * (PI * s).sin() + b[1] * (3.0 * PI * s).sin() + b[2] * s * s;
            (r, th)
        })
        .unwrap()
    }

    fn nudged(p: &DiscretePath, i: usize, c: usize, h: f64) -> DiscretePath {
        let mut q = p.clone();
        if c == 0 {
            q.r[i] += h;
        } else {
            q.theta[i] += h;
        }
        q
    }

    #[test]
    fn gradient_matches_central_differences() {
        let u = fig2();
        for seed in 0..5 {
            let p = random_smooth_path(seed, 24);
            let g = action_gradient(&p, &u, 0.8).unwrap();
            let gm = maupertuis_gradient(&p, &u, 0.8).unwrap();
            for i in 0..p.nodes() {
                for c in 0..2 {
                    let h = 1e-6;
                    let fd = (action(&nudged(&p, i, c, h), &u, 0.8).unwrap()
                        - action(&nudged(&p, i, c, -h), &u, 0.8).unwrap())
                        / (2.0 * h);
                    assert!((fd - g[i][c]).abs() <= 1e-5 * g[i][c].abs().max(1e-3), "{i} {c} {fd} {}", g[i][c]);
                    let fdm = (maupertuis(&nudged(&p, i, c, h), &u, 0.8).unwrap()
                        - maupertuis(&nudged(&p, i, c, -h), &u, 0.8).unwrap())
                        / (2.0 * h);
                    assert!((fdm - gm[i][c]).abs() <= 1e-5 * gm[i][c].abs().max(1e-3));
                }
            }
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let u = fig2();
        let check = |p: &DiscretePath| {
            let h = action_hessian(p, &u, 1.2).unwrap();
            let n = p.nodes();
            for j in 0..n {
                for c in 0..2 {
                    let mut e = vec![[0.0; 2]; n];
                    e[j][c] = 1.0;
                    let col = h.matvec(&e);
                    let step = 1e-6;
                    let gp = action_gradient(&nudged(p, j, c, step), &u, 1.2).unwrap();
                    let gm = action_gradient(&nudged(p, j, c, -step), &u, 1.2).unwrap();
                    for i in 0..n {
                        for d in 0..2 {
                            let fd = (gp[i][d] - gm[i][d]) / (2.0 * step);
                            assert!((fd - col[i][d]).abs() < 1e-5 * col[i][d].abs().max(1.0), "{i}{d} {j}{c}");
                        }
                    }
                }
            }
        };
        check(&random_smooth_path(7, 9));
        let loop_path = DiscretePath::sample_periodic(0.0, 3.0, 7, 1, |s| (1.0 + 0.2 * (TAU * s).sin(), 0.4 + TAU * s)).unwrap();
        check(&loop_path);
    }

    #[test]
    fn circular_zero_energy_arc_splits_evenly() {
        // r ≡ 1 and θ̇ = √(2U) with constant U: kinetic equals potential.
        let u = TrigPolynomial::constant_potential(1.5);
        let w = (2.0 * 1.5f64).sqrt();
        let p = DiscretePath::sample_open(0.0, 1.0, 2000, |s| (1.0, w * s)).unwrap();
        let (k, v) = kinetic_potential(&p, &u, 1.0).unwrap();
        assert!((k - v).abs() < 1e-6 * v);
        assert!((action(&p, &u, 1.0).unwrap() - 2.0 * 1.5).abs() < 1e-6);
    }

    #[test]
    fn potential_part_is_linear_in_u() {
        let p = random_smooth_path(3, 30);
        let u1 = TrigPolynomial::constant_potential(1.0);
        let u2 = TrigPolynomial::constant_potential(2.0);
        let (k1, v1) = kinetic_potential(&p, &u1, 1.0).unwrap();
        let (k2, v2) = kinetic_potential(&p, &u2, 1.0).unwrap();
        assert_eq!(k1, k2);
        assert!((v2 - 2.0 * v1).abs() < 1e-14 * v2);
    }

    #[test]
    fn maupertuis_is_invariant_under_affine_time_maps() {
        let u = fig2();
        let p = random_smooth_path(5, 50);
        let j = maupertuis(&p, &u, 0.7).unwrap();
        for (a, b) in [(0.3, 1.0), (4.0, -2.0)] {
            let q = p.retimed(a, b);
            assert!((maupertuis(&q, &u, 0.7).unwrap() - j).abs() < 1e-12 * j);
        }
    }

    #[test]
    fn maupertuis_is_stable_under_resampling() {
        // The same curve x(t) on a uniform and on a graded grid.
        let u = fig2();
        let x = |t: f64| (1.2 + 0.3 * (PI * t).sin(), 0.5 + 1.5 * t);
        let n = 4000;
        let p = DiscretePath::sample_open(0.0, 1.0, n, x).unwrap();
        let times: Vec<f64> = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                s + 0.2 * s * (1.0 - s)
            })
            .collect();
        let (r, theta) = times.iter().map(|&t| x(t)).unzip();
        let q = DiscretePath::open(times, r, theta).unwrap();
        let (jp, jq) = (maupertuis(&p, &u, 1.0).unwrap(), maupertuis(&q, &u, 1.0).unwrap());
        assert!((jp - jq).abs() < 1e-6 * jp, "{}", (jp - jq).abs() / jp);
    }

    #[test]
    fn collisions_and_bad_grids_are_rejected() {
        let u = fig2();
        let mut p = random_smooth_path(1, 10);
        p.r[4] = 0.0;
        assert_eq!(action(&p, &u, 1.0), Err(Error::Collision { node: 4 }));
        let bad = DiscretePath::open(vec![0.0, 1.0, 1.0], vec![1.0; 3], vec![0.0; 3]);
        assert!(bad.is_err());
        assert!(DiscretePath::sample_periodic(0.0, 1.0, 5, 0, |s| (1.0, s)).is_err());
    }

    #[test]
    fn planar_winding_counts_turns() {
        for k in [1, 2, -3] {
            let p = DiscretePath::sample_periodic(0.0, 1.0, 64, k, |s| (1.0, TAU * k as f64 * s)).unwrap();
            assert_eq!(p.planar_winding(), k);
        }
    }
}
