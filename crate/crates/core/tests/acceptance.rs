//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use common::{fig2, random_sector};
use parabolic_core::integrator::IntegratorConfig;
use parabolic_core::manifolds::{stable_apsidal, unstable_apsidal, ManifoldConfig};
use parabolic_core::phase_plane::{integrate_orbit, v_value, PhaseState};
use parabolic_core::potential::check_class_u;
use parabolic_core::threshold::{
    find_alpha_bar, find_alpha_bar_general, gap, isotropic_alpha_bar, lemma22_bounds, AlphaBar, ThresholdConfig,
};
use parabolic_core::trajectory::{
    constrained_minimizer, find_theta0, psi, psi_derivative, reconstruct, MinimizerKind, TrajectoryConfig,
};
use parabolic_core::variational::{
    action, action_gradient, collision_trend, maupertuis_min, min_action_over_duration, minimize_bolza,
    obstacle_ladder, second_variation_probe, BolzaProblem, DiscretePath, OptimizerConfig, ProbeConfig,
};
use parabolic_core::TrigPolynomial;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Debug>(e: E) -> String {
    format!("error: {e:?}")
}

fn alpha_bar_fig2() -> Result<(f64, (f64, f64), Duration), String> {
    let t = Instant::now();
    let r = find_alpha_bar(&fig2(), 0.0, PI, &ThresholdConfig::default()).map_err(fail)?;
    let a = r.alpha_bar.value().ok_or_else(|| format!("no threshold: {:?}", r.alpha_bar))?;
    Ok((a, r.bracket, t.elapsed()))
}

fn anchor() -> Outcome {
    let (a, (lo, hi), took) = alpha_bar_fig2()?;
    check(
        a > 0.5 && a < 1.0 && hi - lo < 1e-8 && took < Duration::from_secs(10),
        format!("alpha_bar = {a:.12}, bracket width {:.2e}, {:.2} s", hi - lo, took.as_secs_f64()),
    )
}

fn isotropic_limit() -> Outcome {
    let eps = 1e-3;
    let u = TrigPolynomial::new(1.0 + eps, vec![0.0, -eps], vec![]);
    let cfg = ThresholdConfig::with_tol(1e-8);
    let value = |r: parabolic_core::Result<parabolic_core::threshold::ThresholdResult>| -> Result<f64, String> {
        r.map_err(fail)?.alpha_bar.value().ok_or_else(|| "no threshold".to_string())
    };
    let full = value(find_alpha_bar(&u, 0.0, TAU, &cfg))?;
    let direct = value(find_alpha_bar(&u, 0.0, 3.0 * PI, &cfg))?;
    let reduced = value(find_alpha_bar_general(&u, 0.0, 3.0 * PI, &cfg))?;
    let closed = isotropic_alpha_bar(3.0 * PI);
    let tol = 5e-3;
    check(
        (full - 1.0).abs() < tol
            && (direct - 4.0 / 3.0).abs() < tol
            && (reduced - closed).abs() < tol
            && (reduced - direct).abs() < tol,
        format!("2pi: {full:.6}; 3pi direct {direct:.6}, reduced {reduced:.6}, closed form {closed:.6}"),
    )
}

fn containment() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let cfg = ThresholdConfig::with_tol(1e-8);
    let mut violations = Vec::new();
    let mut slack = f64::INFINITY;
    for k in 0..20 {
        let (u, a, b) = random_sector(&mut rng, PI + 0.05, TAU - 0.05);
        let class = check_class_u(&u, a, b).map_err(fail)?;
        if !class.passes() {
            return Err(format!("sample {k} is not in the class: {:?}", class.failures));
        }
        let (lo, hi) = lemma22_bounds(&u, a, b).map_err(fail)?;
        let r = find_alpha_bar_general(&u, a, b, &cfg).map_err(fail)?;
        match r.alpha_bar {
            AlphaBar::Value(x) if x >= lo && x <= hi => slack = slack.min((x - lo).min(hi - x)),
            other => violations.push(format!("#{k}: {other:?} not in [{lo:.6}, {hi:.6}]")),
        }
    }
    check(violations.is_empty(), format!("20 potentials, {} violations, least slack {slack:.3e} {violations:?}", violations.len()))
}

fn monotonicity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let cfg = ManifoldConfig::default();
    let grid: Vec<f64> = (0..16).map(|i| 0.1 + 0.1 * i as f64).collect();
    let mut worst = f64::INFINITY;
    for k in 0..10 {
        let (u, a, b) = random_sector(&mut rng, PI + 0.05, TAU - 0.05);
        let samples = grid.iter().map(|&al| gap(&u, al, a, b, &cfg)).collect::<Result<Vec<_>, _>>().map_err(fail)?;
        for w in samples.windows(2) {
            let err = 10.0 * (w[0].err + w[1].err);
            let margins = [
                w[1].theta_hat_minus - w[0].theta_hat_minus,
                w[0].theta_hat_plus - w[1].theta_hat_plus,
                w[1].gap - w[0].gap,
            ];
            for m in margins {
                if m <= err {
                    return Err(format!("potential {k}, alpha {:.2}: margin {m:.3e} vs 10x error {err:.3e}", w[0].alpha));
                }
                worst = worst.min(m / err);
            }
        }
    }
    check(true, format!("10 potentials x 16 exponents; smallest margin/(10 x error) = {worst:.3e}"))
}

fn dynamics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let tight = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-13, ..IntegratorConfig::default() };
    let mut worst_drop: f64 = 0.0;
    let mut worst_rev: f64 = 0.0;
    for _ in 0..100 {
        let (u, _, _) = random_sector(&mut rng, PI + 0.05, TAU - 0.05);
        let alpha = rng.random_range(0.1..1.9);
        let theta = rng.random_range(0.0..TAU);
        let s0 = PhaseState::new(theta, theta + rng.random_range(0.0..TAU));
        let fwd = integrate_orbit(&u, alpha, s0, 0.0, 8.0, &tight, &[]).map_err(fail)?;
        let vs: Vec<f64> = fwd.states.iter().map(|y| v_value(&u, PhaseState::new(y[0], y[1]))).collect();
        for w in vs.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        let back = integrate_orbit(&u, alpha, s0.reversed(), 0.0, -8.0, &tight, &[]).map_err(fail)?;
        for (tau, y) in fwd.taus.iter().zip(&fwd.states) {
            let z = back.eval(-tau).ok_or("reversed orbit too short")?;
            worst_rev = worst_rev.max((z[0] - y[0]).abs()).max((z[1] - PI - y[1]).abs());
        }
    }
    let mut drift: f64 = 0.0;
    for _ in 0..10 {
        let u = TrigPolynomial::constant_potential(rng.random_range(0.5..3.0));
        let alpha = rng.random_range(0.1..1.9);
        let s0 = PhaseState::new(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let sol = integrate_orbit(&u, alpha, s0, 0.0, 20.0, &IntegratorConfig::default(), &[]).map_err(fail)?;
        let c0 = s0.phi - 0.5 * alpha * s0.theta;
        for y in &sol.states {
            drift = drift.max((y[1] - 0.5 * alpha * y[0] - c0).abs());
        }
    }
    check(
        worst_drop <= 1e-9 && worst_rev < 1e-8 && drift < 1e-9,
        format!("largest v decrease {worst_drop:.2e}, reversal mismatch {worst_rev:.2e}, bundle drift {drift:.2e}"),
    )
}

fn fidelity(alpha_bar: f64) -> Outcome {
    let u = fig2();
    let cfg = TrajectoryConfig::default();
    let x = reconstruct(&u, alpha_bar, 0.0, PI, &cfg).map_err(fail)?;
    let p = x.pericenter_index;
    let monotone = x.samples[..=p].windows(2).all(|w| w[1].r < w[0].r)
        && x.samples[p..].windows(2).all(|w| w[1].r > w[0].r);
    let mut mismatches = Vec::new();
    for k in -4i32..=4 {
        let alpha = alpha_bar + 0.05 * f64::from(k);
        let m = constrained_minimizer(&u, alpha, 0.0, PI, &cfg).map_err(fail)?;
        let g = m.gap.gap;
        let ok = match m.kind {
            MinimizerKind::Smooth => k == 0 && m.delta_pos == 0.0 && m.delta_vel == 0.0,
            MinimizerKind::PositionJump => k < 0 && g < 0.0 && m.delta_pos > 0.0 && m.delta_vel == 0.0,
            MinimizerKind::VelocityJump => k > 0 && g > 0.0 && m.delta_vel > 0.0 && m.delta_pos == 0.0,
        };
        if !ok {
            mismatches.push(format!("alpha {alpha:.4}: {:?}, gap {g:.3e}", m.kind));
        }
    }
    check(
        x.energy_residual_sup < 1e-6 && monotone && mismatches.is_empty(),
        format!(
            "energy residual {:.2e}, r monotone on both sides: {monotone}, trichotomy mismatches {mismatches:?}",
            x.energy_residual_sup
        ),
    )
}

fn velocity_jump(alpha_bar: f64) -> Outcome {
    let u = fig2();
    let alpha = alpha_bar + 0.2;
    let cfg = ManifoldConfig::default();
    let un = unstable_apsidal(&u, alpha, 0.0, &cfg).map_err(fail)?;
    let st = stable_apsidal(&u, alpha, PI, &cfg).map_err(fail)?;
    let (lo, hi) = (st.theta_hat, un.theta_hat);
    let n = 4000;
    let mut changes = 0;
    let mut prev = None;
    for i in 1..n {
        let v = psi(&un, &st, lo + (hi - lo) * i as f64 / n as f64).map_err(fail)?;
        if let Some(p) = prev {
            if (p > 0.0) != (v > 0.0) {
                changes += 1;
            }
        }
        prev = Some(v);
    }
    let (theta0, residual) = find_theta0(&un, &st, 1e-13).map_err(fail)?;
    let slope = psi_derivative(&u, &un, &st, theta0).map_err(fail)?;
    check(
        changes == 1 && residual.abs() < 1e-10 && slope < 0.0,
        format!("sign changes {changes}, theta0 = {theta0:.12}, |psi| = {:.2e}, psi' = {slope:.6}", residual.abs()),
    )
}

fn variational(alpha_bar: f64) -> Outcome {
    let u = fig2();
    let x = reconstruct(&u, alpha_bar, 0.0, PI, &TrajectoryConfig::default()).map_err(fail)?;
    let p = x.pericenter_index;
    let r_cut = 3.0;
    let i1 = (0..p).find(|&i| x.samples[i].r <= r_cut).ok_or("incoming arc too short")?;
    let i2 = (p..x.samples.len()).find(|&i| x.samples[i].r >= r_cut).ok_or("outgoing arc too short")?;
    let (a, b) = (x.samples[i1], x.samples[i2]);
    let arc_action = b.action - a.action;
    let n = 800;
    let mut pb = BolzaProblem::new((a.r, a.theta), (b.r, b.theta), (a.t, b.t));
    pb.segments = n;
    let init = DiscretePath::sample_open(a.t, b.t, n, |s| {
        let (r, th, _) = x.interpolate(&u, a.t + s * (b.t - a.t)).expect("inside the time range");
        (r, th)
    })
    .map_err(fail)?;
    pb.init = Some(init.clone());
    let ocfg = OptimizerConfig::default();
    let (_, rep) = minimize_bolza(&u, alpha_bar, &pb, &ocfg).map_err(fail)?;
    let bolza_rel = (rep.action_value - arc_action).abs() / arc_action;

    let scan = min_action_over_duration(&u, alpha_bar, &pb, &ocfg).map_err(fail)?;
    let (j, two_sqrt_j) = maupertuis_min(&u, alpha_bar, &pb, &ocfg).map_err(fail)?;
    let maup_rel = (scan.action - two_sqrt_j).abs() / two_sqrt_j;
    let ratio = scan.action / (2.0 * j).sqrt();

    // A generic nearby path, so the gradient is not close to zero.
    let mut bent = init;
    let m = bent.r.len();
    for i in 1..m - 1 {
        let s = i as f64 / (m - 1) as f64;
        bent.r[i] *= 1.0 + 0.1 * (PI * s).sin();
        bent.theta[i] += 0.05 * (2.0 * PI * s).sin();
    }
    let g = action_gradient(&bent, &u, alpha_bar).map_err(fail)?;
    let g_sup = g.iter().flat_map(|c| c.iter()).fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut fd_err: f64 = 0.0;
    let h = 1e-6;
    for i in 1..m - 1 {
        for c in 0..2 {
            let mut plus = bent.clone();
            let mut minus = bent.clone();
            if c == 0 {
                plus.r[i] += h;
                minus.r[i] -= h;
            } else {
                plus.theta[i] += h;
                minus.theta[i] -= h;
            }
            let fd = (action(&plus, &u, alpha_bar).map_err(fail)? - action(&minus, &u, alpha_bar).map_err(fail)?)
                / (2.0 * h);
            fd_err = fd_err.max((fd - g[i][c]).abs());
        }
    }
    let grad_rel = fd_err / g_sup.max(1.0);
    check(
        rep.converged && bolza_rel < 1e-3 && maup_rel < 1e-4 && grad_rel < 1e-5,
        format!(
            "Bolza vs arc {bolza_rel:.2e} (A = {arc_action:.8}); min_T A vs 2 sqrt(J) {maup_rel:.2e}, \
             min_T A / sqrt(2J) = {ratio:.6}; gradient vs differences {grad_rel:.2e}"
        ),
    )
}

fn probe() -> Outcome {
    let u = fig2();
    let cfg = ProbeConfig::default();
    let saddle = second_variation_probe(&u, 1.0, FRAC_PI_2, &cfg).map_err(fail)?;
    let minimum = second_variation_probe(&u, 1.0, 0.0, &cfg).map_err(fail)?;
    check(
        saddle.too_strict && saddle.value < 0.0 && minimum.value >= 0.0,
        format!(
            "pi/2: {:.6e} ({:?}); 0: {:.6e} ({:?})",
            saddle.value, saddle.family, minimum.value, minimum.family
        ),
    )
}

fn collision(alpha_bar: f64) -> Outcome {
    let u = fig2();
    let radii = [0.1, 0.05, 0.02, 0.01];
    let ocfg = OptimizerConfig::default();
    let ladder = |alpha: f64, pb: &BolzaProblem| -> Result<Vec<f64>, String> {
        let rungs = obstacle_ladder(&u, alpha, pb, &radii, &ocfg).map_err(fail)?;
        Ok(rungs.iter().map(|r| r.report.min_radius).collect())
    };

    let mut above = BolzaProblem::new((0.12, 0.1), (0.12, PI - 0.1), (0.0, 0.0534));
    above.segments = 800;
    above.sector = Some((0.0, PI));
    let hi = ladder(alpha_bar + 0.3, &above)?;
    let hi_trend = collision_trend(&radii, &hi).map_err(fail)?;

    let mut below = BolzaProblem::new((1.0, 0.1), (1.0, PI - 0.1), (0.0, 1.5));
    below.segments = 2000;
    below.sector = Some((0.0, PI));
    let lo = ladder(alpha_bar - 0.3, &below)?;
    let lo_trend = collision_trend(&radii, &lo).map_err(fail)?;
    let ratios_ok = lo_trend.ratios.iter().all(|q| (1.0..=1.5).contains(q));
    check(
        hi_trend.last_change < 0.1 && ratios_ok,
        format!(
            "alpha_bar+0.3: min r {hi:.5?}, last change {:.2}%; alpha_bar-0.3: min r/eps {:.4?}; \
             trends only, the asymptotic statements are not reproduced",
            100.0 * hi_trend.last_change,
            lo_trend.ratios
        ),
    )
}

fn main() {
    let names = [
        "threshold anchor",
        "isotropic limit",
        "closed-form containment",
        "monotonicity",
        "dynamics invariants",
        "trajectory fidelity",
        "velocity-jump angle",
        "variational cross-check",
        "second-variation probe",
        "collision trend",
    ];
    let start = Instant::now();
    // The anchor is timed on its own, before the parallel batch.
    let first = anchor();
    let alpha_bar = alpha_bar_fig2().map(|r| r.0);
    let rest: Vec<Outcome> = std::thread::scope(|s| {
        let need = |f: fn(f64) -> Outcome| {
            let a = alpha_bar.clone();
            move || a.and_then(f)
        };
        let jobs: Vec<Box<dyn FnOnce() -> Outcome + Send>> = vec![
            Box::new(isotropic_limit),
            Box::new(containment),
            Box::new(monotonicity),
            Box::new(dynamics),
            Box::new(need(fidelity)),
            Box::new(need(velocity_jump)),
            Box::new(need(variational)),
            Box::new(probe),
            Box::new(need(collision)),
        ];
        let handles: Vec<_> = jobs.into_iter().map(|job| s.spawn(job)).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("panicked".to_string()))).collect()
    });
    let mut failed = 0;
    for (i, (name, outcome)) in names.iter().zip(std::iter::once(first).chain(rest)).enumerate() {
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed in {:.1} s", names.len() - failed, names.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
