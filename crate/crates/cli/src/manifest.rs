//! `manifest.json`: what was run, with which inputs and tolerances, and
//! which files it produced.

use crate::formats::write_json;
use crate::Failure;
use parabolic_core::integrator::IntegratorConfig;
use parabolic_core::manifolds::ManifoldConfig;
use parabolic_core::threshold::ThresholdConfig;
use parabolic_core::trajectory::TrajectoryConfig;
use parabolic_core::variational::{OptimizerConfig, ProbeConfig};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

pub const SCHEMA: &str = "parabolic-manifest/1";

/// Every tolerance that can influence a numeric artifact.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tolerances {
    pub threshold: ThresholdConfig,
    pub trajectory: TrajectoryConfig,
    pub optimizer: OptimizerConfig,
    pub probe: ProbeConfig,
}

fn integrator(c: &IntegratorConfig) -> Value {
    json!({
        "rel_tol": c.rel_tol,
        "abs_tol": c.abs_tol,
        "max_step": c.max_step,
        "max_steps": c.max_steps,
        "event_tol": c.event_tol,
    })
}

fn manifold(c: &ManifoldConfig) -> Value {
    json!({
        "integrator": integrator(&c.integrator),
        "seed_scale": c.seed_scale,
        "estimate_error": c.estimate_error,
        "margin": c.margin,
        "max_tau": c.max_tau,
    })
}

impl Tolerances {
    /// The ladder as JSON, from the bisection tolerance down to integrator
    /// settings.
    pub fn ladder(&self) -> Value {
        let t = &self.threshold;
        let x = &self.trajectory;
        let o = &self.optimizer;
        let p = &self.probe;
        json!({
            "threshold": {
                "tol": t.tol,
                "edge": t.edge,
                "widen": t.widen,
                "max_iterations": t.max_iterations,
                "manifold": manifold(&t.manifold),
            },
            "trajectory": {
                "r_max": x.r_max,
                "match_tol": x.match_tol,
                "smooth_tol": x.smooth_tol,
                "root_tol": x.root_tol,
                "integrator": integrator(&x.integrator),
                "manifold": manifold(&x.manifold),
            },
            "optimizer": {
                "max_iterations": o.max_iterations,
                "gtol": o.gtol,
                "armijo": o.armijo,
                "starts": o.starts,
                "seed": o.seed,
                "perturbation": o.perturbation,
            },
            "probe": {
                "window": p.window,
                "eps_margin": p.eps_margin,
                "bump_points": p.bump_points,
                "integrator": integrator(&p.integrator),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Validation,
    NumericalFailure,
    Sentinel,
}

impl Status {
    pub fn of(result: &Result<(), Failure>) -> Status {
        match result {
            Ok(()) => Status::Ok,
            Err(Failure::Validation(_)) | Err(Failure::Io(_)) => Status::Validation,
            Err(Failure::Numerical(_)) => Status::NumericalFailure,
            Err(Failure::Sentinel(_)) => Status::Sentinel,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    pub inputs: Value,
    pub potential: Value,
    pub tolerances: Value,
    pub status: Status,
    pub message: Option<String>,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), Failure> {
        let value = serde_json::to_value(self).map_err(|e| Failure::Io(e.to_string()))?;
        write_json(dir, "manifest.json", &value)
    }
}

/// Collects the names of files written by a job.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub dir: std::path::PathBuf,
    pub names: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), names: Vec::new() })
    }

    pub fn json(&mut self, name: &str, value: &Value) -> Result<(), Failure> {
        write_json(&self.dir, name, value)?;
        self.names.push(name.to_string());
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        crate::formats::write_text(&self.dir, name, text)?;
        self.names.push(name.to_string());
        Ok(())
    }
}
