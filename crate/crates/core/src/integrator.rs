//! Dormand–Prince 5(4) integrator with continuous output and event location.
//!
//! The driver integrates in either direction of the independent variable.
//! Every accepted step keeps its fourth-order dense-output coefficients so
//! callers can evaluate the solution (and its derivative) anywhere on the
//! span, which is how manifolds are later re-read as graphs over `θ`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Bracket width, in the independent variable, at which event location stops.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.25,
            max_steps: 200_000,
            event_tol: 1e-10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.event_tol > 0.0) {
            return Err(Error::InvalidInput("integrator tolerances must be positive"));
        }
        if !(self.max_step > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidInput("integrator step limits must be positive"));
        }
        Ok(())
    }
}

/// Which sign changes of an event function count, measured along the
/// direction of integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

pub struct Event<'a, const N: usize> {
    pub func: &'a dyn Fn(f64, &[f64; N]) -> f64,
    pub direction: Crossing,
    pub terminal: bool,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn terminal(func: &'a dyn Fn(f64, &[f64; N]) -> f64, direction: Crossing) -> Self {
        Event { func, direction, terminal: true }
    }

    fn fires(&self, before: f64, after: f64) -> bool {
        match self.direction {
            Crossing::Rising => before < 0.0 && after >= 0.0,
            Crossing::Falling => before > 0.0 && after <= 0.0,
            Crossing::Either => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    pub index: usize,
    pub tau: f64,
    pub state: [f64; N],
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment<const N: usize> {
    pub tau0: f64,
    pub step: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn tau1(&self) -> f64 {
        self.tau0 + self.step
    }

    pub fn contains(&self, tau: f64) -> bool {
        let (a, b) = ordered(self.tau0, self.tau1());
        tau >= a && tau <= b
    }

    pub fn eval(&self, tau: f64) -> [f64; N] {
        let s = (tau - self.tau0) / self.step;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        core::array::from_fn(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }

    /// Derivative of the interpolant with respect to the independent variable.
    pub fn eval_derivative(&self, tau: f64) -> [f64; N] {
        let s = (tau - self.tau0) / self.step;
        let s1 = 1.0 - s;
        let [_, r2, r3, r4, r5] = &self.coeffs;
        core::array::from_fn(|i| {
            let a = r4[i] + s1 * r5[i];
            let da = -r5[i];
            let b = r3[i] + s * a;
            let db = a + s * da;
            let c = r2[i] + s1 * b;
            let dc = -b + s1 * db;
            (c + s * dc) / self.step
        })
    }
}

/// Accepted steps, their dense output, and located events.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub taus: Vec<f64>,
    pub states: Vec<[f64; N]>,
    /// Field value at each stored state.
    pub derivs: Vec<[f64; N]>,
    pub segments: Vec<DenseSegment<N>>,
    pub events: Vec<EventHit<N>>,
    /// Index of the terminal event that stopped integration, if any.
    pub terminated_by: Option<usize>,
    pub steps_rejected: usize,
}

impl<const N: usize> Solution<N> {
    pub fn last_state(&self) -> &[f64; N] {
        self.states.last().expect("solution holds the initial state")
    }

    pub fn last_tau(&self) -> f64 {
        *self.taus.last().expect("solution holds the initial state")
    }

    /// Index of the segment covering `tau`.
    pub fn segment_index(&self, tau: f64) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let forward = self.segments[0].step > 0.0;
        let idx = self.segments.partition_point(|s| {
            if forward {
                s.tau1() < tau
            } else {
                s.tau1() > tau
            }
        });
        let idx = idx.min(self.segments.len() - 1);
        self.segments[idx].contains(tau).then_some(idx)
    }

    pub fn eval(&self, tau: f64) -> Option<[f64; N]> {
        self.segment_index(tau).map(|i| self.segments[i].eval(tau))
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    core::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn is_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y' = field(τ, y)` from `tau0` towards `tau_end` (either
/// direction). Terminal events stop the integration at the located root;
/// the root state becomes the last stored sample.
pub fn integrate<const N: usize, F>(
    field: F,
    tau0: f64,
    y0: [f64; N],
    tau_end: f64,
    cfg: &IntegratorConfig,
    events: &[Event<'_, N>],
) -> Result<Solution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if !is_finite(&y0) {
        return Err(Error::NonFiniteState { tau: tau0 });
    }
    let dir = if tau_end >= tau0 { 1.0 } else { -1.0 };
    let span = (tau_end - tau0).abs();

    let mut tau = tau0;
    let mut y = y0;
    let mut k1 = field(tau, &y);
    let mut sol = Solution {
        taus: alloc::vec![tau],
        states: alloc::vec![y],
        derivs: alloc::vec![k1],
        segments: Vec::new(),
        events: Vec::new(),
        terminated_by: None,
        steps_rejected: 0,
    };
    if span == 0.0 {
        return Ok(sol);
    }
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.func)(tau, &y)).collect();

    let mut h = initial_step(&field, tau, &y, &k1, dir, cfg).min(span);
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded { tau, steps });
        }
        let remaining = (tau_end - tau).abs();
        let mut final_step = false;
        if h >= remaining {
            h = remaining;
            final_step = true;
        }
        if h < 1e-14 * tau.abs().max(1.0) {
            return Err(Error::StepUnderflow { tau, step: h });
        }
        let hs = dir * h;
        steps += 1;

        let k2 = field(tau + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = field(tau + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = field(tau + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = field(
            tau + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = field(
            tau + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = field(tau + hs, &y_new);

        let mut err_sq = 0.0;
        let mut finite = is_finite(&y_new) && is_finite(&k7);
        for i in 0..N {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sk) * (e / sk);
            finite &= e.is_finite();
        }
        let err = (err_sq / N as f64).sqrt();

        if !finite || err > 1.0 {
            sol.steps_rejected += 1;
            let fac = if finite { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.1 };
            h *= fac.min(1.0);
            last_rejected = true;
            continue;
        }

        let tau_new = if final_step { tau_end } else { tau + hs };
        let mut coeffs = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = y_new[i] - y[i];
            let bspl = hs * k1[i] - ydiff;
            coeffs[0][i] = y[i];
            coeffs[1][i] = ydiff;
            coeffs[2][i] = bspl;
            coeffs[3][i] = ydiff - hs * k7[i] - bspl;
            coeffs[4][i] = hs
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let seg = DenseSegment { tau0: tau, step: hs, coeffs };

        // Earliest event in this step.
        let g_new: Vec<f64> = events.iter().map(|e| (e.func)(tau_new, &y_new)).collect();
        let mut first: Option<(usize, f64)> = None;
        for (idx, ev) in events.iter().enumerate() {
            if ev.fires(g_prev[idx], g_new[idx]) {
                let root = locate_root(&seg, ev.func, tau, tau_new, g_prev[idx], cfg);
                let earlier = match first {
                    None => true,
                    Some((_, t)) => dir * (root - t) < 0.0,
                };
                if earlier {
                    first = Some((idx, root));
                }
            }
        }
        // Non-terminal events up to the first terminal one are recorded.
        let mut stop_at: Option<(usize, f64)> = None;
        let mut hits: Vec<EventHit<N>> = Vec::new();
        for (idx, ev) in events.iter().enumerate() {
            if ev.fires(g_prev[idx], g_new[idx]) {
                let root = if first.map(|f| f.0) == Some(idx) {
                    first.unwrap().1
                } else {
                    locate_root(&seg, ev.func, tau, tau_new, g_prev[idx], cfg)
                };
                hits.push(EventHit { index: idx, tau: root, state: seg.eval(root) });
                if ev.terminal {
                    let earlier = match stop_at {
                        None => true,
                        Some((_, t)) => dir * (root - t) < 0.0,
                    };
                    if earlier {
                        stop_at = Some((idx, root));
                    }
                }
            }
        }
        hits.sort_by(|a, b| (dir * a.tau).partial_cmp(&(dir * b.tau)).unwrap());
        if let Some((idx, root)) = stop_at {
            hits.retain(|hit| dir * (hit.tau - root) <= 0.0);
            let y_root = seg.eval(root);
            let trimmed = DenseSegment { tau0: tau, step: hs, coeffs: seg.coeffs };
            sol.segments.push(trimmed);
            sol.events.extend(hits);
            sol.taus.push(root);
            sol.states.push(y_root);
            sol.derivs.push(field(root, &y_root));
            sol.terminated_by = Some(idx);
            return Ok(sol);
        }
        sol.events.extend(hits);
        sol.segments.push(seg);
        sol.taus.push(tau_new);
        sol.states.push(y_new);
        sol.derivs.push(k7);

        tau = tau_new;
        y = y_new;
        k1 = k7;
        g_prev = g_new;
        if final_step {
            return Ok(sol);
        }

        let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
        fac = fac.clamp(0.2, if last_rejected { 1.0 } else { 10.0 });
        last_rejected = false;
        h = (h * fac).min(cfg.max_step);
    }
}

/// Bracketed Illinois iteration on the dense output.
fn locate_root<const N: usize>(
    seg: &DenseSegment<N>,
    g: &dyn Fn(f64, &[f64; N]) -> f64,
    mut a: f64,
    mut b: f64,
    mut ga: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let eval = |t: f64| g(t, &seg.eval(t));
    let mut gb = eval(b);
    if gb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !c.is_finite() || (c - a) * (c - b) > 0.0 {
            c = 0.5 * (a + b);
        }
        let gc = eval(c);
        if gc == 0.0 {
            return c;
        }
        if gc * gb < 0.0 {
            a = b;
            ga = gb;
            side = 0;
        } else {
            ga *= if side == 1 { 0.5 } else { 1.0 };
            side = 1;
        }
        b = c;
        gb = gc;
        let width = (b - a).abs();
        if (width < cfg.event_tol && gb.abs() <= cfg.abs_tol) || width < 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
    }
    // The last iterate `b` may sit on either side; return the better end.
    if eval(a).abs() < gb.abs() {
        a
    } else {
        b
    }
}

fn initial_step<const N: usize, F>(
    field: &F,
    tau: f64,
    y: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    cfg: &IntegratorConfig,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sk: [f64; N] = core::array::from_fn(|i| cfg.abs_tol + cfg.rel_tol * y[i].abs());
    let rms = |v: &[f64; N]| -> f64 {
        (v.iter().zip(&sk).map(|(x, s)| (x / s) * (x / s)).sum::<f64>() / N as f64).sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step);
    let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
    let f1 = field(tau + dir * h0, &y1);
    let diff: [f64; N] = core::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (1e-6f64).max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_constant_polyline() {
        let sol = integrate(|_, _| [0.0, 0.0], 0.0, [1.5, -2.0], 10.0, &IntegratorConfig::default(), &[])
            .unwrap();
        assert!(sol.states.iter().all(|s| *s == [1.5, -2.0]));
        assert_eq!(sol.last_tau(), 10.0);
    }

    #[test]
    fn exponential_growth_matches_closed_form() {
        let cfg = IntegratorConfig::default();
        let sol = integrate(|_, y| [y[0]], 0.0, [1.0], 3.0, &cfg, &[]).unwrap();
        let exact = 3.0f64.exp();
        assert!((sol.last_state()[0] - exact).abs() < 1e-8 * exact);
        // Dense output in the interior.
        let mid = sol.eval(1.2345).unwrap()[0];
        assert!((mid - 1.2345f64.exp()).abs() < 1e-8);
        let d = sol.segments[sol.segment_index(1.2345).unwrap()].eval_derivative(1.2345)[0];
        assert!((d - 1.2345f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn backward_integration() {
        let cfg = IntegratorConfig::default();
        let sol = integrate(|_, y| [-y[1], y[0]], 0.0, [1.0, 0.0], -2.0, &cfg, &[]).unwrap();
        let s = sol.last_state();
        assert!((s[0] - 2.0f64.cos()).abs() < 1e-9);
        assert!((s[1] + 2.0f64.sin()).abs() < 1e-9);
        assert!((sol.eval(-1.0).unwrap()[0] - 1.0f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn terminal_event_is_located() {
        // Harmonic oscillator: x = cos τ first hits zero at π/2.
        let cfg = IntegratorConfig::default();
        let g = |_: f64, y: &[f64; 2]| y[0];
        let ev = [Event::terminal(&g, Crossing::Falling)];
        let sol = integrate(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, &cfg, &ev).unwrap();
        assert_eq!(sol.terminated_by, Some(0));
        assert!((sol.last_tau() - core::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!(sol.last_state()[0].abs() < 1e-12);
    }

    #[test]
    fn direction_filter() {
        let cfg = IntegratorConfig::default();
        let g = |_: f64, y: &[f64; 2]| y[0];
        let ev = [Event::terminal(&g, Crossing::Rising)];
        let sol = integrate(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, &cfg, &ev).unwrap();
        assert!((sol.last_tau() - 1.5 * core::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn max_steps_is_an_error() {
        let cfg = IntegratorConfig { max_steps: 3, max_step: 0.01, ..Default::default() };
        let r = integrate(|_, y| [y[0]], 0.0, [1.0], 5.0, &cfg, &[]);
        assert!(matches!(r, Err(Error::MaxStepsExceeded { .. })));
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = IntegratorConfig { rel_tol: 0.0, ..Default::default() };
        assert!(integrate(|_, y| [y[0]], 0.0, [1.0], 1.0, &cfg, &[]).is_err());
    }
}
