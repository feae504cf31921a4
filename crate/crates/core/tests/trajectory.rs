mod common;

use common::fig2;
use parabolic_core::threshold::{find_alpha_bar, ThresholdConfig};
use parabolic_core::trajectory::{reconstruct, ParabolicTrajectory, TrajectoryConfig};
use parabolic_core::variational::{
    action, kinetic_potential, ray_slope_limit, trajectory_log_slope, DiscretePath,
};
use parabolic_core::TrigPolynomial;
use std::f64::consts::{PI, TAU};

fn matched(u: &TrigPolynomial, lo: f64, hi: f64, tol: f64) -> (f64, ParabolicTrajectory) {
    let a = find_alpha_bar(u, lo, hi, &ThresholdConfig::with_tol(tol)).unwrap().alpha_bar.value().unwrap();
    (a, reconstruct(u, a, lo, hi, &TrajectoryConfig::default()).unwrap())
}

/// `ẍ = ∇V` in Cartesian coordinates.
fn accel(u: &TrigPolynomial, alpha: f64, x: [f64; 2]) -> [f64; 2] {
    let r = x[0].hypot(x[1]);
    let th = x[1].atan2(x[0]);
    let j = u.jet(th);
    let s = r.powf(-alpha - 1.0);
    let radial = -alpha * j.value * s;
    let angular = j.d1 * s;
    let (sn, cs) = th.sin_cos();
    [radial * cs - angular * sn, radial * sn + angular * cs]
}

fn rk4_cartesian(u: &TrigPolynomial, alpha: f64, mut x: [f64; 2], mut v: [f64; 2], t: f64, steps: usize) -> [f64; 2] {
    let h = t / steps as f64;
    for _ in 0..steps {
        let f = |x: [f64; 2], v: [f64; 2]| (v, accel(u, alpha, x));
        let (k1x, k1v) = f(x, v);
        let (k2x, k2v) = f(
            [x[0] + 0.5 * h * k1x[0], x[1] + 0.5 * h * k1x[1]],
            [v[0] + 0.5 * h * k1v[0], v[1] + 0.5 * h * k1v[1]],
        );
        let (k3x, k3v) = f(
            [x[0] + 0.5 * h * k2x[0], x[1] + 0.5 * h * k2x[1]],
            [v[0] + 0.5 * h * k2v[0], v[1] + 0.5 * h * k2v[1]],
        );
        let (k4x, k4v) = f([x[0] + h * k3x[0], x[1] + h * k3x[1]], [v[0] + h * k3v[0], v[1] + h * k3v[1]]);
        for c in 0..2 {
            x[c] += h / 6.0 * (k1x[c] + 2.0 * k2x[c] + 2.0 * k3x[c] + k4x[c]);
            v[c] += h / 6.0 * (k1v[c] + 2.0 * k2v[c] + 2.0 * k3v[c] + k4v[c]);
        }
    }
    x
}

#[test]
fn reconstruction_agrees_with_cartesian_newton() {
    let u = fig2();
    let (a, x) = matched(&u, 0.0, PI, 1e-10);
    let p = &x.samples[x.pericenter_index];
    let (s, c) = p.theta.sin_cos();
    let pos = [p.r * c, p.r * s];
    let vel = [p.r_dot * c - p.r * p.theta_dot * s, p.r_dot * s + p.r * p.theta_dot * c];
    let mut worst: f64 = 0.0;
    for t in [-3.0, -1.0, 0.5, 2.0, 4.0] {
        let oracle = rk4_cartesian(&u, a, pos, vel, t, 20_000);
        let (r, th, _) = x.interpolate(&u, p.t + t).unwrap();
        let d = (r * th.cos() - oracle[0]).hypot(r * th.sin() - oracle[1]);
        worst = worst.max(d / r);
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn near_isotropic_threshold_orbit_is_a_kepler_parabola() {
    // With U ≡ 1 and α = 1 the zero-energy orbit with pericenter r = 1 at
    // θ = π is r(1 − cos θ) = 2.
    let distance = |eps: f64| {
        let u = TrigPolynomial::new(1.0 + eps, vec![0.0, -eps], vec![]);
        let (_, x) = matched(&u, 0.0, TAU, 1e-10);
        x.samples
            .iter()
            .filter(|s| s.r < 20.0)
            .map(|s| (s.r * (1.0 - s.theta.cos()) / 2.0 - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let coarse = distance(1e-3);
    let fine = distance(1e-5);
    assert!(coarse < 5e-2 && fine < 1e-3, "{coarse} {fine}");
    assert!(fine < 0.05 * coarse);
}

#[test]
fn outgoing_arc_approaches_the_homothetic_ray() {
    let u = fig2();
    let (a, x) = matched(&u, 0.0, PI, 1e-10);
    let last = x.samples.last().unwrap();
    let gamma = ray_slope_limit(&u, a, PI);
    let rel = (trajectory_log_slope(a, last) - gamma).abs() / gamma;
    assert!(rel < 1e-4, "r = {} rel = {rel}", last.r);
    let first = x.samples.first().unwrap();
    let rel = (trajectory_log_slope(a, first) + ray_slope_limit(&u, a, 0.0)).abs() / gamma;
    assert!(rel < 1e-4, "r = {} rel = {rel}", first.r);
}

fn arc_section(u: &TrigPolynomial, x: &ParabolicTrajectory, r_cut: f64, n: usize) -> (DiscretePath, f64) {
    let p = x.pericenter_index;
    let i1 = (0..p).find(|&i| x.samples[i].r <= r_cut).unwrap();
    let i2 = (p..x.samples.len()).find(|&i| x.samples[i].r >= r_cut).unwrap();
    let (a, b) = (x.samples[i1], x.samples[i2]);
    let path = DiscretePath::sample_open(a.t, b.t, n, |s| {
        let (r, th, _) = x.interpolate(u, a.t + s * (b.t - a.t)).unwrap();
        (r, th)
    })
    .unwrap();
    (path, b.action - a.action)
}

#[test]
fn kinetic_and_potential_parts_coincide_on_the_arc() {
    let u = fig2();
    let (a, x) = matched(&u, 0.0, PI, 1e-10);
    let (path, _) = arc_section(&u, &x, 3.0, 800);
    let (k, p) = kinetic_potential(&path, &u, a).unwrap();
    assert!((k - p).abs() / p < 1e-5, "{k} {p}");
}

#[test]
fn discretized_action_converges_at_second_order() {
    let u = fig2();
    let (a, x) = matched(&u, 0.0, PI, 1e-10);
    let errs: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let (path, exact) = arc_section(&u, &x, 3.0, n);
            (action(&path, &u, a).unwrap() - exact).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
}
