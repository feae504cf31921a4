#![allow(dead_code)]

use parabolic_core::TrigPolynomial;
use rand::Rng;
use std::f64::consts::{PI, TAU};

pub fn fig2() -> TrigPolynomial {
    TrigPolynomial::new(2.0, vec![0.0, -1.0], vec![])
}

/// Trigonometric interpolation of `f` on `n` equispaced nodes; exact for
/// polynomials of degree below `n/2`.
pub fn interpolate(n: usize, degree: usize, f: impl Fn(f64) -> f64) -> TrigPolynomial {
    let values: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
    let c0 = values.iter().sum::<f64>() / n as f64;
    let mut cs = Vec::new();
    let mut ss = Vec::new();
    for k in 1..=degree {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let (s, c) = (k as f64 * TAU * j as f64 / n as f64).sin_cos();
            a += v * c;
            b += v * s;
        }
        cs.push(2.0 * a / n as f64);
        ss.push(2.0 * b / n as f64);
    }
    TrigPolynomial::new(c0, cs, ss)
}

/// `c + (1 − cos(θ−a))(1 − cos(θ−b)) g(θ)` with a positive degree-2 factor
/// `g`: global minima exactly at `a` and `b`, both nondegenerate.
pub fn two_well(rng: &mut impl Rng, a: f64, b: f64) -> TrigPolynomial {
    let c = rng.random_range(0.5..3.0);
    let scale = rng.random_range(0.3..2.0);
    let p1 = rng.random_range(-0.4..0.4);
    let p2 = rng.random_range(-0.4..0.4);
    let d1 = rng.random_range(0.0..TAU);
    let d2 = rng.random_range(0.0..TAU);
    let g = move |t: f64| scale * (1.0 + p1 * (t - d1).cos() + p2 * (2.0 * t - d2).cos());
    interpolate(32, 4, move |t| c + (1.0 - (t - a).cos()) * (1.0 - (t - b).cos()) * g(t))
}

/// Random two-well potential with minima `a < b` at distance in `(lo, hi)`.
pub fn random_sector(rng: &mut impl Rng, lo: f64, hi: f64) -> (TrigPolynomial, f64, f64) {
    let width = rng.random_range(lo..hi);
    let a = rng.random_range(0.0..(TAU - width).min(PI));
    let b = a + width;
    (two_well(rng, a, b), a, b)
}
