//! Phase portraits of the reduced `(θ, φ)` flow as SVG.
//!
//! Rendering is a pure function of the computed polylines; coordinates are
//! printed with two decimals so equal inputs give byte-equal files.

use parabolic_core::manifolds::{stable_apsidal, unstable_apsidal, ManifoldConfig};
use parabolic_core::phase_plane::{classify_equilibria, integrate_orbit, PhaseState, Stability};
use parabolic_core::potential::{find_central_configurations, CriticalKind};
use parabolic_core::{Error, TrigPolynomial};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 50.0;

/// `θ` along the horizontal axis, `φ` along the vertical one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub theta: (f64, f64),
    pub phi: (f64, f64),
}

impl Window {
    pub fn new(theta: (f64, f64), phi: (f64, f64)) -> Result<Self, String> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && b > a;
        if ok(theta) && ok(phi) {
            Ok(Window { theta, phi })
        } else {
            Err("window bounds must be finite with LO < HI".into())
        }
    }

    /// `θ ∈ [−π/4, 2π + π/4]`, `φ ∈ [−π/2, 3π + π/2]`.
    pub fn standard() -> Self {
        Window { theta: (-0.25 * PI, TAU + 0.25 * PI), phi: (-FRAC_PI_2, 3.0 * PI + FRAC_PI_2) }
    }

    fn contains(&self, th: f64, ph: f64) -> bool {
        th >= self.theta.0 && th <= self.theta.1 && ph >= self.phi.0 && ph <= self.phi.1
    }

    fn x(&self, th: f64) -> f64 {
        MARGIN + (th - self.theta.0) / (self.theta.1 - self.theta.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, ph: f64) -> f64 {
        HEIGHT - MARGIN - (ph - self.phi.0) / (self.phi.1 - self.phi.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitConfig {
    /// Number of sample orbits; zero draws only axes, lines and equilibria.
    pub orbits: usize,
    /// Each sample orbit is integrated over `[−span, span]` in `τ`.
    pub span: f64,
    pub manifold: ManifoldConfig,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        PortraitConfig { orbits: 24, span: 6.0, manifold: ManifoldConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Saddle,
    Sink,
    Source,
    Degenerate,
}

/// Everything drawn in a portrait, in phase-plane coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layers {
    pub equilibria: Vec<(f64, f64, Marker)>,
    pub unstable: Vec<Vec<(f64, f64)>>,
    pub stable: Vec<Vec<(f64, f64)>>,
    pub orbits: Vec<Vec<(f64, f64)>>,
}

fn translates(angle: f64, lo: f64, hi: f64) -> Vec<f64> {
    let k0 = ((lo - angle) / TAU).ceil() as i64;
    let k1 = ((hi - angle) / TAU).floor() as i64;
    (k0..=k1).map(|k| angle + k as f64 * TAU).collect()
}

/// Equilibria, saddle manifolds up to their pericenter crossing, and a
/// deterministic grid of sample orbits.
pub fn compute_layers(u: &TrigPolynomial, alpha: f64, window: &Window, cfg: &PortraitConfig) -> Result<Layers, Error> {
    parabolic_core::phase_plane::check_exponent(alpha)?;
    let mut layers = Layers::default();
    let equilibria = match classify_equilibria(u) {
        Ok(e) => e,
        Err(Error::ConstantPotential) => Vec::new(),
        Err(e) => return Err(e),
    };
    for e in &equilibria {
        let marker = match e.stability {
            Stability::Saddle => Marker::Saddle,
            Stability::Sink => Marker::Sink,
            Stability::Source => Marker::Source,
            Stability::Degenerate => Marker::Degenerate,
        };
        let s = e.state();
        for th in translates(s.theta, window.theta.0, window.theta.1) {
            for ph in translates(th + s.delta(), window.phi.0, window.phi.1) {
                layers.equilibria.push((th, ph, marker));
            }
        }
    }
    if !u.is_constant() {
        for c in find_central_configurations(u, 1e-12)? {
            if c.kind != CriticalKind::Minimum {
                continue;
            }
            for th in translates(c.angle, window.theta.0, window.theta.1) {
                let pts = |p: &parabolic_core::manifolds::ApsidalResult| -> Vec<(f64, f64)> {
                    p.polyline.iter().map(|s| (s.theta, s.phi)).collect()
                };
                if let Ok(m) = unstable_apsidal(u, alpha, th, &cfg.manifold) {
                    layers.unstable.push(pts(&m));
                }
                if let Ok(m) = stable_apsidal(u, alpha, th, &cfg.manifold) {
                    layers.stable.push(pts(&m));
                }
            }
        }
    }
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let icfg = parabolic_core::integrator::IntegratorConfig { rel_tol: 1e-8, abs_tol: 1e-10, ..Default::default() };
    for i in 0..cfg.orbits {
        let th = window.theta.0 + (i as f64 + 0.5) / cfg.orbits as f64 * (window.theta.1 - window.theta.0);
        let delta = ((i as f64 + 1.0) * golden).fract() * TAU;
        let s0 = PhaseState::new(th, th + delta);
        let mut line = Vec::new();
        if let Ok(b) = integrate_orbit(u, alpha, s0, 0.0, -cfg.span, &icfg, &[]) {
            line.extend(b.states.iter().rev().map(|y| (y[0], y[1])));
        }
        if let Ok(f) = integrate_orbit(u, alpha, s0, 0.0, cfg.span, &icfg, &[]) {
            line.extend(f.states.iter().skip(1).map(|y| (y[0], y[1])));
        }
        if line.len() >= 2 {
            layers.orbits.push(line);
        }
    }
    Ok(layers)
}

/// Splits a polyline into the runs that stay inside the window.
fn clipped(window: &Window, line: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    let mut runs = Vec::new();
    let mut cur = Vec::new();
    for &(th, ph) in line {
        if window.contains(th, ph) {
            cur.push((th, ph));
        } else if !cur.is_empty() {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if cur.len() >= 2 {
        runs.push(cur);
    }
    runs.retain(|r| r.len() >= 2);
    runs
}

fn polyline(out: &mut String, window: &Window, line: &[(f64, f64)], style: &str) {
    for run in clipped(window, line) {
        let pts: Vec<String> = run.iter().map(|&(t, p)| format!("{:.2},{:.2}", window.x(t), window.y(p))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" {style}/>"#, pts.join(" "));
    }
}

/// Lines `φ = θ + c` crossing the window.
fn diagonal(out: &mut String, window: &Window, c: f64, style: &str) {
    let (t0, t1) = window.theta;
    let lo = t0.max(window.phi.0 - c);
    let hi = t1.min(window.phi.1 - c);
    if hi > lo {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
            window.x(lo),
            window.y(lo + c),
            window.x(hi),
            window.y(hi + c)
        );
    }
}

pub fn render_layers(alpha: f64, window: &Window, layers: &Layers) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" font-size="16" text-anchor="middle">alpha = {alpha:.6}</text>"#, WIDTH / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">theta</text>"#, WIDTH / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {})">phi</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    // θ' = 0 on φ − θ ≡ 0 (mod π), pericenter lines on φ − θ ≡ π/2 (mod π).
    let span = (window.phi.0 - window.theta.1, window.phi.1 - window.theta.0);
    let k0 = (span.0 / FRAC_PI_2).floor() as i64;
    let k1 = (span.1 / FRAC_PI_2).ceil() as i64;
    for k in k0..=k1 {
        let style = if k % 2 == 0 {
            r##"stroke="#999999" stroke-dasharray="6 4" fill="none""##
        } else {
            r##"stroke="#4a7bd0" stroke-dasharray="2 3" fill="none""##
        };
        diagonal(&mut s, window, k as f64 * FRAC_PI_2, style);
    }
    for line in &layers.orbits {
        polyline(&mut s, window, line, r##"stroke="#bbbbbb" stroke-width="1" fill="none""##);
    }
    for line in &layers.unstable {
        polyline(&mut s, window, line, r##"stroke="#d62728" stroke-width="2" fill="none""##);
    }
    for line in &layers.stable {
        polyline(&mut s, window, line, r##"stroke="#1f77b4" stroke-width="2" fill="none""##);
    }
    for &(th, ph, marker) in &layers.equilibria {
        if !window.contains(th, ph) {
            continue;
        }
        let fill = match marker {
            Marker::Saddle => "black",
            Marker::Sink => "#2ca02c",
            Marker::Source => "white",
            Marker::Degenerate => "#ff7f0e",
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="black"/>"#,
            window.x(th),
            window.y(ph)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_portrait(u: &TrigPolynomial, alpha: f64, window: &Window, cfg: &PortraitConfig) -> Result<String, Error> {
    Ok(render_layers(alpha, window, &compute_layers(u, alpha, window, cfg)?))
}
