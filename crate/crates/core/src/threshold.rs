//! The threshold exponent `ᾱ`.
//!
//! For a pair of minimal configurations `θ⁻ < θ⁺`, the gap
//! `θ̂⁻(α) − θ̂⁺(α)` is strictly increasing in `α`, and a parabolic motion
//! from `θ⁻` to `θ⁺` exists exactly where it vanishes. `ᾱ` is the infimum of
//! the exponents with positive gap, found here by bisection inside a
//! closed-form bracket.
//!
//! Sectors wider than `2π` are handled either directly on the universal
//! cover or through the conformal change `θ ↦ θ/(h+1)`, which maps the
//! problem for `(U, α)` to one for `Ũ(θ) = U((h+1)θ)/(h+1)²` with
//! `α̃ = 2 − (h+1)(2 − α)`.

use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::manifolds::{stable_apsidal, unstable_apsidal, ManifoldConfig};
use crate::phase_plane::check_exponent;
use crate::potential::TrigPolynomial;
use crate::{Error, Result};

/// One evaluation of the gap function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub alpha: f64,
    pub theta_hat_minus: f64,
    pub theta_hat_plus: f64,
    pub gap: f64,
    /// Sum of the two apsidal error estimates.
    pub err: f64,
}

fn check_order(theta_minus: f64, theta_plus: f64) -> Result<()> {
    if !(theta_plus > theta_minus) || !theta_minus.is_finite() || !theta_plus.is_finite() {
        return Err(Error::InvalidInput("need finite angles with theta_minus < theta_plus"));
    }
    Ok(())
}

/// `θ̂⁻(α) − θ̂⁺(α)`.
pub fn gap(
    u: &TrigPolynomial,
    alpha: f64,
    theta_minus: f64,
    theta_plus: f64,
    cfg: &ManifoldConfig,
) -> Result<GapSample> {
    check_order(theta_minus, theta_plus)?;
    let lo = unstable_apsidal(u, alpha, theta_minus, cfg)?;
    let hi = stable_apsidal(u, alpha, theta_plus, cfg)?;
    Ok(GapSample {
        alpha,
        theta_hat_minus: lo.theta_hat,
        theta_hat_plus: hi.theta_hat,
        gap: lo.theta_hat - hi.theta_hat,
        err: lo.err_estimate + hi.err_estimate,
    })
}

/// Closed-form enclosure of `ᾱ`:
/// `2 − 2π/Δθ ≤ ᾱ ≤ 2 − (4/Δθ) arcsin √(U_min/U_max)`, clipped to `[0, 2]`.
///
/// Below the lower end the gap is negative, above the upper end positive.
pub fn lemma22_bounds(u: &TrigPolynomial, theta_minus: f64, theta_plus: f64) -> Result<(f64, f64)> {
    check_order(theta_minus, theta_plus)?;
    let width = theta_plus - theta_minus;
    let (u_min, u_max) = u.extremes();
    if !(u_min > 0.0) {
        return Err(Error::InvalidInput("potential must be positive"));
    }
    let lo = 2.0 - TAU / width;
    let hi = 2.0 - 4.0 / width * (u_min / u_max).sqrt().min(1.0).asin();
    Ok((lo.clamp(0.0, 2.0), hi.clamp(0.0, 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaBar {
    Value(f64),
    /// The gap is positive on the whole admissible range; the threshold
    /// takes the extended value 0 (no parabolic motion for any `α`).
    BelowRange,
    /// The gap never becomes positive below 2.
    AboveRange,
}

impl AlphaBar {
    pub fn value(&self) -> Option<f64> {
        match self {
            AlphaBar::Value(a) => Some(*a),
            _ => None,
        }
    }

    /// Value with the convention that an empty set of parabolic exponents
    /// below the range reads as `0`.
    pub fn extended(&self) -> Option<f64> {
        match self {
            AlphaBar::Value(a) => Some(*a),
            AlphaBar::BelowRange => Some(0.0),
            AlphaBar::AboveRange => None,
        }
    }
}

/// Problem after the conformal change for winding `h ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    pub potential: TrigPolynomial,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub h: u32,
    /// Threshold of the reduced problem, once solved.
    pub alpha_bar: Option<AlphaBar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub alpha_bar: AlphaBar,
    /// Final bisection bracket (`lo` has gap ≤ 0, `hi` has gap > 0).
    pub bracket: (f64, f64),
    pub gap_at_bracket: (f64, f64),
    /// Closed-form enclosure used to start the search.
    pub bounds: (f64, f64),
    pub winding_h: u32,
    pub reduced: Option<ReducedProblem>,
    /// Number of gap evaluations.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    /// Target width of the final bracket in `α`.
    pub tol: f64,
    /// Distance kept from the ends of `(0, 2)`.
    pub edge: f64,
    /// The closed-form bracket is widened by this much on each side.
    pub widen: f64,
    pub manifold: ManifoldConfig,
    pub max_iterations: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            tol: 1e-8,
            edge: 1e-3,
            widen: 1e-3,
            manifold: ManifoldConfig::default(),
            max_iterations: 200,
        }
    }
}

impl ThresholdConfig {
    pub fn with_tol(tol: f64) -> Self {
        ThresholdConfig { tol, ..Default::default() }
    }

    fn bisection_manifold(&self) -> ManifoldConfig {
        ManifoldConfig { estimate_error: false, ..self.manifold }
    }
}

/// Bisection for `ᾱ` with `θ⁻ < θ⁺` taken literally on the universal cover.
///
/// Any `Δθ > 0` is accepted; for `Δθ > 2π` this is the direct route that
/// [`find_alpha_bar_general`] avoids through the conformal change.
pub fn find_alpha_bar(
    u: &TrigPolynomial,
    theta_minus: f64,
    theta_plus: f64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdResult> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidInput("threshold tolerance must be positive"));
    }
    let bounds = lemma22_bounds(u, theta_minus, theta_plus)?;
    let mcfg = cfg.bisection_manifold();
    let lo_edge = cfg.edge;
    let hi_edge = 2.0 - cfg.edge;
    let mut iterations = 0usize;
    let mut eval = |alpha: f64| -> Result<f64> {
        iterations += 1;
        Ok(gap(u, alpha, theta_minus, theta_plus, &mcfg)?.gap)
    };

    let mut lo = (bounds.0 - cfg.widen).clamp(lo_edge, hi_edge);
    let mut hi = (bounds.1 + cfg.widen).clamp(lo_edge, hi_edge);
    if lo >= hi {
        lo = lo_edge;
    }
    let mut g_lo = eval(lo)?;
    if g_lo > 0.0 {
        if lo > lo_edge {
            hi = lo;
            lo = lo_edge;
            g_lo = eval(lo)?;
        }
        if g_lo > 0.0 {
            return Ok(ThresholdResult {
                alpha_bar: AlphaBar::BelowRange,
                bracket: (lo, lo),
                gap_at_bracket: (g_lo, g_lo),
                bounds,
                winding_h: 0,
                reduced: None,
                iterations,
            });
        }
    }
    let mut g_hi = eval(hi)?;
    if g_hi <= 0.0 {
        if hi < hi_edge {
            lo = hi;
            g_lo = g_hi;
            hi = hi_edge;
            g_hi = eval(hi)?;
        }
        if g_hi <= 0.0 {
            return Ok(ThresholdResult {
                alpha_bar: AlphaBar::AboveRange,
                bracket: (hi, hi),
                gap_at_bracket: (g_hi, g_hi),
                bounds,
                winding_h: 0,
                reduced: None,
                iterations,
            });
        }
    }
    let mut steps = 0;
    while hi - lo >= cfg.tol && steps < cfg.max_iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = eval(mid)?;
        if g > 0.0 {
            hi = mid;
            g_hi = g;
        } else {
            lo = mid;
            g_lo = g;
        }
        steps += 1;
    }
    Ok(ThresholdResult {
        alpha_bar: AlphaBar::Value(0.5 * (lo + hi)),
        bracket: (lo, hi),
        gap_at_bracket: (g_lo, g_hi),
        bounds,
        winding_h: 0,
        reduced: None,
        iterations,
    })
}

/// Winding count `h` with `2hπ < θ⁺ − θ⁻ ≤ 2(h+1)π`.
pub fn winding_index(theta_minus: f64, theta_plus: f64) -> Result<u32> {
    check_order(theta_minus, theta_plus)?;
    let turns = ((theta_plus - theta_minus) / TAU).ceil();
    Ok((turns as u32).max(1) - 1)
}

/// Conformal change to the base sector. For `h = 0` the problem is returned
/// unchanged.
pub fn conformal_reduce(u: &TrigPolynomial, theta_minus: f64, theta_plus: f64) -> Result<ReducedProblem> {
    let h = winding_index(theta_minus, theta_plus)?;
    let m = h as usize + 1;
    let beta = m as f64;
    Ok(ReducedProblem {
        potential: if h == 0 { u.clone() } else { u.compose_frequency(m, 1.0 / (beta * beta)) },
        theta_minus: theta_minus / beta,
        theta_plus: theta_plus / beta,
        h,
        alpha_bar: None,
    })
}

/// `α` of the original problem from `α̃` of the reduced one.
pub fn lift_alpha(reduced_alpha: f64, h: u32) -> f64 {
    2.0 - (2.0 - reduced_alpha) / f64::from(h + 1)
}

/// `α̃ = 2 − (h+1)(2 − α)`.
pub fn reduce_alpha(alpha: f64, h: u32) -> f64 {
    2.0 - f64::from(h + 1) * (2.0 - alpha)
}

/// No parabolic minimizer with winding `h ≥ 1` exists for `α ≤ 2 − 1/h`.
pub fn winding_excludes(alpha: f64, h: u32) -> bool {
    h >= 1 && alpha <= 2.0 - 1.0 / f64::from(h)
}

/// `ᾱ` for any pair of distinct minimal configurations on the cover:
/// orders the endpoints (the threshold is symmetric under time reversal),
/// reduces the winding and maps the answer back.
pub fn find_alpha_bar_general(
    u: &TrigPolynomial,
    theta_minus: f64,
    theta_plus: f64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdResult> {
    if theta_minus == theta_plus {
        return Err(Error::InvalidInput("endpoints must differ"));
    }
    let (a, b) = if theta_minus < theta_plus { (theta_minus, theta_plus) } else { (theta_plus, theta_minus) };
    let mut reduced = conformal_reduce(u, a, b)?;
    if reduced.h == 0 {
        return find_alpha_bar(u, a, b, cfg);
    }
    let h = reduced.h;
    // Bisection width in α̃ is (h+1) times the width in α.
    let inner_cfg = ThresholdConfig { tol: cfg.tol * f64::from(h + 1), ..*cfg };
    let inner = find_alpha_bar(&reduced.potential, reduced.theta_minus, reduced.theta_plus, &inner_cfg)?;
    reduced.alpha_bar = Some(inner.alpha_bar);
    let alpha_bar = match inner.alpha_bar {
        AlphaBar::Value(x) => AlphaBar::Value(lift_alpha(x, h)),
        other => other,
    };
    Ok(ThresholdResult {
        alpha_bar,
        bracket: (lift_alpha(inner.bracket.0, h), lift_alpha(inner.bracket.1, h)),
        gap_at_bracket: inner.gap_at_bracket,
        bounds: lemma22_bounds(u, a, b)?,
        winding_h: h,
        reduced: Some(reduced),
        iterations: inner.iterations,
    })
}

/// Isotropic threshold `2 − 2π/Δθ` (zero when `Δθ ≤ π`).
pub fn isotropic_alpha_bar(width: f64) -> f64 {
    (2.0 - TAU / width).max(0.0)
}

/// Upper end `π/(2−α)` of the apsidal half-angle enclosure.
pub fn half_angle_bound(alpha: f64) -> Result<f64> {
    check_exponent(alpha)?;
    Ok(PI / (2.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fig2() -> TrigPolynomial {
        TrigPolynomial::new(2.0, vec![0.0, -1.0], vec![])
    }

    fn near_isotropic(eps: f64) -> TrigPolynomial {
        TrigPolynomial::new(1.0 + eps, vec![0.0, -eps], vec![])
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = lemma22_bounds(&fig2(), 0.0, PI).unwrap();
        assert_eq!(lo, 0.0);
        let expect = 2.0 - 4.0 / PI * (1.0f64 / 3.0).sqrt().asin();
        assert!((hi - expect).abs() < 1e-12 && (hi - 1.21635).abs() < 1e-5);

        let one = TrigPolynomial::constant_potential(1.0);
        let (lo, hi) = lemma22_bounds(&one, 0.0, TAU).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);

        let (lo, _) = lemma22_bounds(&fig2(), 0.0, 3.0 * PI).unwrap();
        assert!((lo - 4.0 / 3.0).abs() < 1e-15);
        assert!(lemma22_bounds(&fig2(), 1.0, 1.0).is_err());
    }

    #[test]
    fn gap_sign_on_full_turn() {
        let cfg = ManifoldConfig::default();
        assert!(gap(&fig2(), 0.5, 0.0, TAU, &cfg).unwrap().gap < 0.0);
        assert!(gap(&fig2(), 1.5, 0.0, TAU, &cfg).unwrap().gap > 0.0);
    }

    #[test]
    fn fig2_threshold() {
        let r = find_alpha_bar(&fig2(), 0.0, PI, &ThresholdConfig::default()).unwrap();
        let a = r.alpha_bar.value().unwrap();
        assert!(a > 0.5 && a < 1.0, "{a}");
        assert!(r.bracket.1 - r.bracket.0 < 1e-8);
        assert!(r.gap_at_bracket.0 <= 0.0 && r.gap_at_bracket.1 > 0.0);
        assert!(a >= r.bounds.0 && a <= r.bounds.1);
    }

    #[test]
    fn near_isotropic_full_turn() {
        let r = find_alpha_bar(&near_isotropic(1e-3), 0.0, TAU, &ThresholdConfig::with_tol(1e-7)).unwrap();
        assert!((r.alpha_bar.value().unwrap() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn narrow_sector_of_mild_perturbation_has_no_threshold() {
        // Minima of 1 + ε(1 − cos 3θ) are 2π/3 apart.
        let u = TrigPolynomial::new(1.01, vec![0.0, 0.0, -0.01], vec![]);
        let r = find_alpha_bar(&u, 0.0, TAU / 3.0, &ThresholdConfig::with_tol(1e-6)).unwrap();
        assert_eq!(r.alpha_bar, AlphaBar::BelowRange);
        assert_eq!(r.alpha_bar.extended(), Some(0.0));
    }

    #[test]
    fn half_turn_threshold_vanishes_in_the_isotropic_limit() {
        // At Δθ = π the isotropic gap 2π/(2−α) − π vanishes as α → 0, so the
        // perturbation decides; the threshold shrinks with ε.
        let cfg = ThresholdConfig::with_tol(1e-7);
        let a = find_alpha_bar(&near_isotropic(1e-2), 0.0, PI, &cfg).unwrap().alpha_bar.extended().unwrap();
        let b = find_alpha_bar(&near_isotropic(1e-3), 0.0, PI, &cfg).unwrap().alpha_bar.extended().unwrap();
        assert!(a < 0.05 && b < a);
    }

    #[test]
    fn reduction_examples() {
        let red = conformal_reduce(&fig2(), 0.0, 3.0 * PI).unwrap();
        assert_eq!(red.h, 1);
        assert_eq!(red.potential, TrigPolynomial::new(0.5, vec![0.0, 0.0, 0.0, -0.25], vec![]));
        assert!((red.theta_plus - red.theta_minus - 1.5 * PI).abs() < 1e-15);

        let same = conformal_reduce(&fig2(), 0.0, PI).unwrap();
        assert_eq!(same.h, 0);
        assert_eq!(same.potential, fig2());
        assert_eq!(same.theta_plus, PI);

        assert_eq!(winding_index(0.0, TAU).unwrap(), 0);
        assert_eq!(winding_index(0.0, TAU + 1e-9).unwrap(), 1);
        assert_eq!(winding_index(0.0, 2.0 * TAU).unwrap(), 1);
    }

    #[test]
    fn alpha_maps_are_inverse() {
        for h in 1..4 {
            for a in [0.3, 1.0, 1.7] {
                assert!((lift_alpha(reduce_alpha(a, h), h) - a).abs() < 1e-15);
            }
        }
        assert!((lift_alpha(2.0 / 3.0, 1) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn winding_prefilter() {
        assert!(winding_excludes(1.0, 1));
        assert!(!winding_excludes(1.01, 1));
        assert!(winding_excludes(1.5, 2));
        assert!(!winding_excludes(0.1, 0));
    }

    #[test]
    fn reversal_is_symmetric() {
        let cfg = ThresholdConfig::with_tol(1e-6);
        let a = find_alpha_bar_general(&fig2(), 0.0, TAU, &cfg).unwrap();
        let b = find_alpha_bar_general(&fig2(), TAU, 0.0, &cfg).unwrap();
        assert_eq!(a.alpha_bar, b.alpha_bar);
    }

    #[test]
    fn no_parabolic_motion_inside_the_sector_above_threshold() {
        let r = find_alpha_bar(&fig2(), 0.0, PI, &ThresholdConfig::with_tol(1e-6)).unwrap();
        let a = r.alpha_bar.value().unwrap() + 0.1;
        let g = gap(&fig2(), a, 0.0, PI, &ManifoldConfig::default()).unwrap();
        assert!(g.gap > 10.0 * g.err);
    }
}
