//! Subcommand arguments and their implementations.
//!
//! Each job validates its arguments, computes, writes artifacts into the
//! output directory and finally `manifest.json`, which is written even when
//! the job fails after validation.

use crate::formats::{
    parse_angle_pair, parse_finite, parse_pair, parse_polar, parse_radians, parse_range, read_potential, Csv,
    PotentialFile, Range,
};
use crate::manifest::{Artifacts, Manifest, Status, Tolerances, SCHEMA};
use crate::svg::{render_portrait, PortraitConfig, Window};
use crate::Failure;
use clap::{Args, Subcommand};
use parabolic_core::phase_plane::check_exponent;
use parabolic_core::potential::{check_class_u, find_central_configurations, too_strict_test, CriticalKind};
use parabolic_core::threshold::{find_alpha_bar_general, gap, AlphaBar, GapSample, ThresholdResult};
use parabolic_core::trajectory::{
    check_parabolic_definition, constrained_minimizer, reconstruct, DefinitionTolerances, MinimizerKind,
    ParabolicTrajectory,
};
use parabolic_core::variational::{
    collision_trend, minimize_bolza, minimize_periodic, obstacle_ladder, second_variation_probe, BolzaProblem,
    DiscretePath, MinimizeReport, OptimizerConfig, PeriodicProblem, ProbeConfig,
};
use parabolic_core::TrigPolynomial;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::TAU;
use std::path::PathBuf;

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Potential file: {"constant": a0, "cos": [...], "sin": [...]}.
    #[arg(long)]
    pub potential: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Sector {
    /// Asymptotic angle at t → −∞, radians.
    #[arg(long, value_parser = parse_radians, allow_hyphen_values = true)]
    pub theta_minus: f64,
    /// Asymptotic angle at t → +∞, radians.
    #[arg(long, value_parser = parse_radians, allow_hyphen_values = true)]
    pub theta_plus: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sector: Sector,
    /// Bisection width for the threshold exponent.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_finite)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GapCurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sector: Sector,
    /// Exponents LO:HI:N.
    #[arg(long, value_parser = parse_range)]
    pub alpha_range: Range,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(id = "exponent", required = true, multiple = false, args = ["alpha", "alpha_range"])]
pub struct PortraitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_finite)]
    pub alpha: Option<f64>,
    /// One portrait per exponent LO:HI:N.
    #[arg(long, value_parser = parse_range)]
    pub alpha_range: Option<Range>,
    /// θ range of the plot, LO:HI in radians.
    #[arg(long, value_parser = parse_angle_pair, allow_hyphen_values = true)]
    pub theta_window: Option<(f64, f64)>,
    /// φ range of the plot, LO:HI in radians.
    #[arg(long, value_parser = parse_angle_pair, allow_hyphen_values = true)]
    pub phi_window: Option<(f64, f64)>,
    /// Number of sample orbits.
    #[arg(long, default_value_t = 24)]
    pub orbits: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sector: Sector,
    /// Exponent; defaults to the threshold exponent of the sector.
    #[arg(long, value_parser = parse_finite)]
    pub alpha: Option<f64>,
    /// Bisection width used when the threshold has to be computed.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_finite)]
    pub tol: f64,
    /// Samples stop once r exceeds this radius.
    #[arg(long, default_value_t = 1e4, value_parser = parse_finite)]
    pub r_max: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Optimizer {
    #[arg(long, default_value_t = 400)]
    pub segments: usize,
    #[arg(long, default_value_t = 400)]
    pub max_iterations: usize,
    /// Random restarts besides the plain initial guess.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
}

impl Optimizer {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iterations: self.max_iterations,
            starts: self.starts,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BolzaArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_finite)]
    pub alpha: f64,
    /// Start point R:THETA.
    #[arg(long, value_parser = parse_polar, allow_hyphen_values = true)]
    pub start: (f64, f64),
    /// End point R:THETA.
    #[arg(long, value_parser = parse_polar, allow_hyphen_values = true)]
    pub end: (f64, f64),
    /// Time interval T0:T1.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub interval: (f64, f64),
    /// Angular walls LO:HI in radians.
    #[arg(long, value_parser = parse_angle_pair, allow_hyphen_values = true)]
    pub sector: Option<(f64, f64)>,
    /// Obstacle radius: nodes are kept at r ≥ ε.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, conflicts_with = "ladder")]
    pub obstacle: f64,
    /// Comma-separated obstacle radii solved as a warm-started ladder.
    #[arg(long, value_delimiter = ',', value_parser = parse_finite)]
    pub ladder: Option<Vec<f64>>,
    #[command(flatten)]
    pub optimizer: Optimizer,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PeriodicArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = parse_finite)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_finite)]
    pub period: f64,
    /// Number of turns around the origin (non-zero).
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub winding: i64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite)]
    pub obstacle: f64,
    #[command(flatten)]
    pub optimizer: Optimizer,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sector: Sector,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_finite)]
    pub tol: f64,
    /// Exponents for the gap curve LO:HI:N.
    #[arg(long, value_parser = parse_range, default_value = "0.1:1.9:19")]
    pub alpha_range: Range,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Threshold exponent ᾱ for a pair of minimal central configurations.
    Threshold(ThresholdArgs),
    /// Apsidal angles and gap over a range of exponents.
    GapCurve(GapCurveArgs),
    /// Phase portraits of the reduced flow as SVG.
    Portrait(PortraitArgs),
    /// Parabolic trajectory or constrained minimizer.
    Trajectory(TrajectoryArgs),
    /// Fixed-endpoint, fixed-time action minimization.
    Bolza(BolzaArgs),
    /// Closed loops with prescribed period and winding.
    Periodic(PeriodicArgs),
    /// Threshold, gap curve, trajectory and non-minimality checks in one run.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Threshold(_) => "threshold",
            Command::GapCurve(_) => "gap-curve",
            Command::Portrait(_) => "portrait",
            Command::Trajectory(_) => "trajectory",
            Command::Bolza(_) => "bolza",
            Command::Periodic(_) => "periodic",
            Command::Report(_) => "report",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Threshold(a) => &a.common,
            Command::GapCurve(a) => &a.common,
            Command::Portrait(a) => &a.common,
            Command::Trajectory(a) => &a.common,
            Command::Bolza(a) => &a.common,
            Command::Periodic(a) => &a.common,
            Command::Report(a) => &a.common,
        }
    }

    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        match self {
            Command::Threshold(a) => t.threshold.tol = a.tol,
            Command::Trajectory(a) => {
                t.threshold.tol = a.tol;
                t.trajectory.r_max = a.r_max;
            }
            Command::Report(a) => t.threshold.tol = a.tol,
            Command::Bolza(a) => t.optimizer = a.optimizer.config(),
            Command::Periodic(a) => t.optimizer = a.optimizer.config(),
            Command::GapCurve(_) | Command::Portrait(_) => {}
        }
        t
    }
}

/// What a finished job reports on stdout.
pub type Summary = String;

struct Context {
    u: TrigPolynomial,
    tol: Tolerances,
    ladder: Value,
    files: Artifacts,
}

/// Runs a command end to end. Validation failures before the output
/// directory exists leave nothing behind; later failures still produce a
/// manifest.
pub fn run(cmd: &Command) -> Result<Summary, Failure> {
    let common = cmd.common();
    let u = read_potential(&common.potential)?;
    let tol = cmd.tolerances();
    validate(cmd)?;
    let ladder = tol.ladder();
    let mut ctx = Context { u: u.clone(), tol, ladder: ladder.clone(), files: Artifacts::new(&common.out)? };
    let result = match cmd {
        Command::Threshold(a) => threshold(&mut ctx, a),
        Command::GapCurve(a) => gap_curve(&mut ctx, a),
        Command::Portrait(a) => portrait(&mut ctx, a),
        Command::Trajectory(a) => trajectory(&mut ctx, a),
        Command::Bolza(a) => bolza(&mut ctx, a),
        Command::Periodic(a) => periodic(&mut ctx, a),
        Command::Report(a) => report(&mut ctx, a),
    };
    let (status_result, summary) = match &result {
        Ok(s) => (Ok(()), Some(s.clone())),
        Err(e) => (Err(e.clone()), None),
    };
    let manifest = Manifest {
        schema: SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        core_version: parabolic_core::VERSION,
        command: cmd.name().to_string(),
        inputs: serde_json::to_value(cmd).map_err(|e| Failure::Io(e.to_string()))?,
        potential: serde_json::to_value(PotentialFile::from_polynomial(&u)).map_err(|e| Failure::Io(e.to_string()))?,
        tolerances: ladder,
        status: Status::of(&status_result),
        message: status_result.err().map(|e| e.to_string()),
        artifacts: ctx.files.names.clone(),
    };
    manifest.write(&common.out)?;
    result.map(|_| summary.unwrap_or_default())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    check_exponent(alpha).map_err(Failure::from)
}

fn check_sector(s: &Sector) -> Result<(), Failure> {
    if !(s.theta_minus < s.theta_plus) {
        return Err(invalid("need theta-minus < theta-plus"));
    }
    Ok(())
}

fn check_range(r: &Range) -> Result<(), Failure> {
    if r.is_empty() {
        return Err(invalid(format!("empty alpha range {}:{}:{}", r.lo, r.hi, r.count)));
    }
    for a in r.values() {
        check_alpha(a)?;
    }
    Ok(())
}

fn validate(cmd: &Command) -> Result<(), Failure> {
    let positive = |v: f64, what: &str| if v > 0.0 { Ok(()) } else { Err(invalid(format!("{what} must be positive"))) };
    match cmd {
        Command::Threshold(a) => {
            check_sector(&a.sector)?;
            positive(a.tol, "tol")
        }
        Command::GapCurve(a) => {
            check_sector(&a.sector)?;
            check_range(&a.alpha_range)
        }
        Command::Portrait(a) => {
            if let Some(al) = a.alpha {
                check_alpha(al)?;
            }
            if let Some(r) = &a.alpha_range {
                check_range(r)?;
            }
            if let Some(w) = a.theta_window {
                Window::new(w, (0.0, 1.0)).map_err(invalid)?;
            }
            if let Some(w) = a.phi_window {
                Window::new((0.0, 1.0), w).map_err(invalid)?;
            }
            Ok(())
        }
        Command::Trajectory(a) => {
            check_sector(&a.sector)?;
            if let Some(al) = a.alpha {
                check_alpha(al)?;
            }
            positive(a.tol, "tol")?;
            positive(a.r_max - 1.0, "r-max - 1")
        }
        Command::Bolza(a) => {
            check_alpha(a.alpha)?;
            positive(a.start.0, "start radius")?;
            positive(a.end.0, "end radius")?;
            positive(a.interval.1 - a.interval.0, "interval length")?;
            if a.optimizer.segments < 2 {
                return Err(invalid("need at least two segments"));
            }
            if !(a.obstacle >= 0.0) {
                return Err(invalid("obstacle radius must be non-negative"));
            }
            if let Some(l) = &a.ladder {
                if l.is_empty() || l.iter().any(|e| !(*e > 0.0)) {
                    return Err(invalid("ladder radii must be positive"));
                }
            }
            if let Some((lo, hi)) = a.sector {
                let inside = |t: f64| t >= lo && t <= hi;
                if !(hi > lo && inside(a.start.1) && inside(a.end.1)) {
                    return Err(invalid("endpoints must lie in the closed sector"));
                }
            }
            Ok(())
        }
        Command::Periodic(a) => {
            check_alpha(a.alpha)?;
            positive(a.period, "period")?;
            if a.winding == 0 {
                return Err(invalid("winding must be non-zero"));
            }
            if a.optimizer.segments < 3 {
                return Err(invalid("need at least three segments"));
            }
            if !(a.obstacle >= 0.0) {
                return Err(invalid("obstacle radius must be non-negative"));
            }
            Ok(())
        }
        Command::Report(a) => {
            check_sector(&a.sector)?;
            positive(a.tol, "tol")?;
            check_range(&a.alpha_range)
        }
    }
}

fn threshold_json(r: &ThresholdResult) -> Value {
    let (status, value) = match r.alpha_bar {
        AlphaBar::Value(a) => ("value", Some(a)),
        AlphaBar::BelowRange => ("below-range", None),
        AlphaBar::AboveRange => ("above-range", None),
    };
    json!({
        "alpha_bar": value,
        "status": status,
        "extended": r.alpha_bar.extended(),
        "bracket": [r.bracket.0, r.bracket.1],
        "gap_at_bracket": [r.gap_at_bracket.0, r.gap_at_bracket.1],
        "h": r.winding_h,
        "bounds": [r.bounds.0, r.bounds.1],
        "iterations": r.iterations,
        "reduced": r.reduced.as_ref().map(|p| json!({
            "potential": PotentialFile::from_polynomial(&p.potential),
            "theta_minus": p.theta_minus,
            "theta_plus": p.theta_plus,
            "alpha_bar": p.alpha_bar.and_then(|a| a.value()),
        })),
    })
}

fn sentinel(r: &ThresholdResult) -> Failure {
    match r.alpha_bar {
        AlphaBar::BelowRange => Failure::Sentinel("no threshold: the gap is positive for every exponent".into()),
        _ => Failure::Sentinel("no threshold: the gap stays non-positive below 2".into()),
    }
}

fn solve_threshold(ctx: &Context, s: &Sector) -> Result<ThresholdResult, Failure> {
    Ok(find_alpha_bar_general(&ctx.u, s.theta_minus, s.theta_plus, &ctx.tol.threshold)?)
}

fn threshold(ctx: &mut Context, a: &ThresholdArgs) -> Result<Summary, Failure> {
    let r = solve_threshold(ctx, &a.sector)?;
    let mut out = threshold_json(&r);
    out["tolerances"] = ctx.ladder.clone();
    ctx.files.json("threshold.json", &out)?;
    match r.alpha_bar {
        AlphaBar::Value(v) => Ok(format!("alpha_bar = {v:.16e} (bracket width {:.3e})", r.bracket.1 - r.bracket.0)),
        _ => Err(sentinel(&r)),
    }
}

fn gap_samples(ctx: &Context, s: &Sector, alphas: &[f64]) -> Vec<Result<GapSample, Failure>> {
    let (lo, hi) = (s.theta_minus, s.theta_plus);
    let cfg = ctx.tol.threshold.manifold;
    alphas.par_iter().map(|&al| gap(&ctx.u, al, lo, hi, &cfg).map_err(Failure::from)).collect()
}

fn gap_csv(ctx: &Context, samples: &[Result<GapSample, Failure>]) -> Csv {
    let mut csv = Csv::new(&ctx.ladder, &["alpha", "theta_hat_minus", "theta_hat_plus", "gap", "err"]);
    for g in samples.iter().flatten() {
        csv.row(&[g.alpha, g.theta_hat_minus, g.theta_hat_plus, g.gap, g.err]);
    }
    csv
}

fn first_failure(alphas: &[f64], samples: &[Result<GapSample, Failure>]) -> Option<Failure> {
    alphas.iter().zip(samples).find_map(|(a, s)| match s {
        Err(e) => Some(Failure::Numerical(format!("alpha = {a}: {e}"))),
        Ok(_) => None,
    })
}

fn gap_curve(ctx: &mut Context, a: &GapCurveArgs) -> Result<Summary, Failure> {
    let alphas = a.alpha_range.values();
    let samples = gap_samples(ctx, &a.sector, &alphas);
    let csv = gap_csv(ctx, &samples);
    ctx.files.text("gap_curve.csv", csv.as_str())?;
    if let Some(f) = first_failure(&alphas, &samples) {
        return Err(f);
    }
    Ok(format!("{} gap samples", samples.len()))
}

fn portrait(ctx: &mut Context, a: &PortraitArgs) -> Result<Summary, Failure> {
    let alphas = match (a.alpha, &a.alpha_range) {
        (Some(al), _) => vec![al],
        (None, Some(r)) => r.values(),
        (None, None) => return Err(invalid("need --alpha or --alpha-range")),
    };
    let std = Window::standard();
    let window = Window::new(a.theta_window.unwrap_or(std.theta), a.phi_window.unwrap_or(std.phi)).map_err(invalid)?;
    let cfg = PortraitConfig { orbits: a.orbits, manifold: ctx.tol.threshold.manifold, ..PortraitConfig::default() };
    let svgs: Vec<Result<String, Failure>> = alphas
        .par_iter()
        .map(|&al| render_portrait(&ctx.u, al, &window, &cfg).map_err(Failure::from))
        .collect();
    for (i, svg) in svgs.into_iter().enumerate() {
        ctx.files.text(&format!("portrait_{i:03}.svg"), &svg?)?;
    }
    Ok(format!("{} portraits", alphas.len()))
}

fn trajectory_csv(ctx: &Context, x: &ParabolicTrajectory) -> Csv {
    let mut csv = Csv::new(&ctx.ladder, &["t", "r", "theta", "x", "y", "energy_residual"]);
    for s in &x.samples {
        let [px, py] = s.position();
        csv.row(&[s.t, s.r, s.theta, px, py, s.energy_residual]);
    }
    csv
}

fn kind_name(k: MinimizerKind) -> &'static str {
    match k {
        MinimizerKind::Smooth => "smooth",
        MinimizerKind::PositionJump => "position-jump",
        MinimizerKind::VelocityJump => "velocity-jump",
    }
}

fn trajectory(ctx: &mut Context, a: &TrajectoryArgs) -> Result<Summary, Failure> {
    let (lo, hi) = (a.sector.theta_minus, a.sector.theta_plus);
    let cfg = ctx.tol.trajectory;
    let (alpha, threshold) = match a.alpha {
        Some(al) => (al, None),
        None => {
            let r = solve_threshold(ctx, &a.sector)?;
            match r.alpha_bar {
                AlphaBar::Value(v) => (v, Some(r)),
                _ => return Err(sentinel(&r)),
            }
        }
    };
    let m = constrained_minimizer(&ctx.u, alpha, lo, hi, &cfg)?;
    let report = check_parabolic_definition(&ctx.u, &m.trajectory, &DefinitionTolerances::default());
    ctx.files.text("trajectory.csv", trajectory_csv(ctx, &m.trajectory).as_str())?;
    let out = json!({
        "alpha": alpha,
        "kind": kind_name(m.kind),
        "gap": m.gap.gap,
        "gap_err": m.gap.err,
        "theta_hat_minus": m.gap.theta_hat_minus,
        "theta_hat_plus": m.gap.theta_hat_plus,
        "delta_pos": m.delta_pos,
        "delta_vel": m.delta_vel,
        "theta0": m.theta0,
        "psi_residual": m.psi_residual,
        "action": m.trajectory.action,
        "energy_residual_sup": m.trajectory.energy_residual_sup,
        "velocity_jump": m.trajectory.velocity_jump,
        "pericenter_index": m.trajectory.pericenter_index,
        "circular_range": m.trajectory.circular_range.map(|(s, e)| [s, e]),
        "definition": {
            "passes": report.passes(),
            "min_radius": report.min_radius,
            "asymptote_errors": [report.asymptote_errors.0, report.asymptote_errors.1],
            "equation_residual": report.equation_residual,
            "truncation_radius": report.truncation_radius,
            "c1": report.c1_ok,
        },
        "threshold": threshold.as_ref().map(threshold_json),
        "arcs": ["trajectory.csv"],
        "tolerances": ctx.ladder.clone(),
    });
    ctx.files.json("minimizer.json", &out)?;
    Ok(format!("{} minimizer at alpha = {alpha:.16e}", kind_name(m.kind)))
}

fn path_csv(ctx: &Context, p: &DiscretePath) -> Csv {
    let mut csv = Csv::new(&ctx.ladder, &["t", "r", "theta", "x", "y"]);
    for (i, [x, y]) in p.positions().into_iter().enumerate() {
        csv.row(&[p.times[i], p.r[i], p.theta[i], x, y]);
    }
    csv
}

fn report_json(r: &MinimizeReport) -> Value {
    let c = &r.active_constraints;
    json!({
        "action_value": r.action_value,
        "min_radius": r.min_radius,
        "iterations": r.iterations,
        "converged": r.converged,
        "projected_gradient": r.projected_gradient,
        "start": r.start,
        "active_constraints": {
            "sector_lo": c.sector_lo,
            "sector_hi": c.sector_hi,
            "obstacle": c.obstacle,
            "obstacle_radius": c.obstacle_radius,
        },
    })
}

fn not_converged(reports: &[&MinimizeReport]) -> Option<Failure> {
    let bad = reports.iter().filter(|r| !r.converged).count();
    (bad > 0).then(|| Failure::Numerical(format!("{bad} of {} minimizations did not converge", reports.len())))
}

fn bolza(ctx: &mut Context, a: &BolzaArgs) -> Result<Summary, Failure> {
    let mut pb = BolzaProblem::new(a.start, a.end, a.interval);
    pb.segments = a.optimizer.segments;
    pb.sector = a.sector;
    pb.obstacle = a.obstacle;
    let cfg = a.optimizer.config();
    match &a.ladder {
        None => {
            let (path, rep) = minimize_bolza(&ctx.u, a.alpha, &pb, &cfg)?;
            ctx.files.text("path.csv", path_csv(ctx, &path).as_str())?;
            let out = json!({ "report": report_json(&rep), "path": "path.csv", "tolerances": ctx.ladder.clone() });
            ctx.files.json("bolza.json", &out)?;
            if let Some(f) = not_converged(&[&rep]) {
                return Err(f);
            }
            Ok(format!("action = {:.16e}, min r = {:.6e}", rep.action_value, rep.min_radius))
        }
        Some(radii) => {
            let rungs = obstacle_ladder(&ctx.u, a.alpha, &pb, radii, &cfg)?;
            let mut entries = Vec::new();
            for (i, rung) in rungs.iter().enumerate() {
                let name = format!("path_{i:02}.csv");
                ctx.files.text(&name, path_csv(ctx, &rung.path).as_str())?;
                entries.push(json!({ "obstacle": rung.obstacle, "report": report_json(&rung.report), "path": name }));
            }
            let mins: Vec<f64> = rungs.iter().map(|r| r.report.min_radius).collect();
            let trend = if radii.len() >= 2 {
                let t = collision_trend(radii, &mins)?;
                Some(json!({
                    "slope": t.slope,
                    "ratios": t.ratios,
                    "last_change": t.last_change,
                    "colliding": t.colliding,
                }))
            } else {
                None
            };
            let out = json!({ "rungs": entries, "trend": trend, "tolerances": ctx.ladder.clone() });
            ctx.files.json("bolza.json", &out)?;
            let reports: Vec<&MinimizeReport> = rungs.iter().map(|r| &r.report).collect();
            if let Some(f) = not_converged(&reports) {
                return Err(f);
            }
            Ok(format!("{} rungs, min r = {mins:?}", rungs.len()))
        }
    }
}

fn periodic(ctx: &mut Context, a: &PeriodicArgs) -> Result<Summary, Failure> {
    let mut pb = PeriodicProblem::new(a.period, a.winding);
    pb.segments = a.optimizer.segments;
    pb.obstacle = a.obstacle;
    let (path, rep) = minimize_periodic(&ctx.u, a.alpha, &pb, &a.optimizer.config())?;
    ctx.files.text("path.csv", path_csv(ctx, &path).as_str())?;
    let out = json!({
        "report": report_json(&rep),
        "winding": path.planar_winding(),
        "path": "path.csv",
        "tolerances": ctx.ladder.clone(),
    });
    ctx.files.json("periodic.json", &out)?;
    if let Some(f) = not_converged(&[&rep]) {
        return Err(f);
    }
    Ok(format!("action = {:.16e}, min r = {:.6e}", rep.action_value, rep.min_radius))
}

fn report(ctx: &mut Context, a: &ReportArgs) -> Result<Summary, Failure> {
    let u = ctx.u.clone();
    let configs = find_central_configurations(&u, 1e-12)?;
    let wrap = |t: f64| t.rem_euclid(TAU);
    let (x, y) = (wrap(a.sector.theta_minus), wrap(a.sector.theta_plus));
    let (w1, w2) = if x <= y { (x, y) } else { (y, x) };
    let class = check_class_u(&u, w1, w2)?;
    let r = solve_threshold(ctx, &a.sector)?;
    let alphas = a.alpha_range.values();
    let samples = gap_samples(ctx, &a.sector, &alphas);
    ctx.files.text("gap_curve.csv", gap_csv(ctx, &samples).as_str())?;

    let mut md = String::new();
    md.push_str("# Parabolic trajectory report\n\n");
    md.push_str(&format!(
        "Sector: theta- = {:.12}, theta+ = {:.12}\n\n",
        a.sector.theta_minus, a.sector.theta_plus
    ));
    md.push_str("## Central configurations\n\n| angle | U | U'' | kind |\n|---|---|---|---|\n");
    for c in &configs {
        md.push_str(&format!("| {:.12} | {:.12} | {:.6e} | {:?} |\n", c.angle, c.value, c.curvature, c.kind));
    }
    md.push_str(&format!(
        "\nClass check: {}\n\n",
        if class.passes() { "pass".to_string() } else { format!("fail {:?}", class.failures) }
    ));
    md.push_str(&format!("Closed-form bounds: [{:.12}, {:.12}]\n\n", r.bounds.0, r.bounds.1));

    let mut trajectory_json = Value::Null;
    let mut probes = Vec::new();
    let alpha_bar = r.alpha_bar.value();
    match alpha_bar {
        Some(ab) => {
            md.push_str(&format!("Threshold: alpha_bar = {ab:.16e}, winding h = {}\n\n", r.winding_h));
            let x = reconstruct(&u, ab, a.sector.theta_minus, a.sector.theta_plus, &ctx.tol.trajectory)?;
            let def = check_parabolic_definition(&u, &x, &DefinitionTolerances::default());
            ctx.files.text("trajectory.csv", trajectory_csv(ctx, &x).as_str())?;
            md.push_str(&format!(
                "Trajectory at alpha_bar: {} samples, energy residual {:.3e}, action {:.12}, definition check {}\n\n",
                x.samples.len(),
                x.energy_residual_sup,
                x.action,
                if def.passes() { "pass" } else { "fail" }
            ));
            trajectory_json = json!({
                "samples": x.samples.len(),
                "energy_residual_sup": x.energy_residual_sup,
                "action": x.action,
                "definition_passes": def.passes(),
                "file": "trajectory.csv",
            });
            md.push_str("## Non-minimality at maxima\n\n| angle | too strict | probe value | probe family |\n|---|---|---|---|\n");
            let pcfg = ProbeConfig::default();
            for c in configs.iter().filter(|c| c.kind == CriticalKind::Maximum) {
                let strict = too_strict_test(&u, c.angle, ab)?;
                let p = second_variation_probe(&u, ab, c.angle, &pcfg)?;
                md.push_str(&format!("| {:.12} | {strict} | {:.6e} | {:?} |\n", c.angle, p.value, p.family));
                probes.push(json!({
                    "angle": c.angle,
                    "too_strict": strict,
                    "value": p.value,
                    "weighted_norm": p.weighted_norm,
                    "gamma": p.gamma,
                    "mu": p.mu,
                }));
            }
            md.push('\n');
        }
        None => md.push_str(&format!("Threshold: none ({:?})\n\n", r.alpha_bar)),
    }
    md.push_str("## Gap curve\n\n| alpha | theta_hat- | theta_hat+ | gap |\n|---|---|---|---|\n");
    for g in samples.iter().flatten() {
        md.push_str(&format!(
            "| {:.4} | {:.10} | {:.10} | {:.6e} |\n",
            g.alpha, g.theta_hat_minus, g.theta_hat_plus, g.gap
        ));
    }
    let out = json!({
        "central_configurations": configs.iter().map(|c| json!({
            "angle": c.angle,
            "value": c.value,
            "curvature": c.curvature,
            "kind": format!("{:?}", c.kind),
        })).collect::<Vec<_>>(),
        "class_passes": class.passes(),
        "class_failures": class.failures.iter().map(|f| format!("{f:?}")).collect::<Vec<_>>(),
        "threshold": threshold_json(&r),
        "trajectory": trajectory_json,
        "probes": probes,
        "gap_curve": "gap_curve.csv",
        "tolerances": ctx.ladder.clone(),
    });
    ctx.files.json("report.json", &out)?;
    ctx.files.text("report.md", &md)?;
    if let Some(f) = first_failure(&alphas, &samples) {
        return Err(f);
    }
    match alpha_bar {
        Some(ab) => Ok(format!("alpha_bar = {ab:.16e}")),
        None => Err(sentinel(&r)),
    }
}
