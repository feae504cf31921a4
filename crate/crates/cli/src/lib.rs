//! IO, rendering and orchestration around `parabolic-core`.
//!
//! Every command writes its artifacts (JSON, CSV, SVG) into one output
//! directory together with a `manifest.json` describing the run.

use std::fmt;

pub mod formats;
pub mod jobs;
pub mod manifest;
pub mod svg;

/// Why a command did not finish cleanly; each kind has its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Validation(String),
    Numerical(String),
    /// The computation succeeded but produced a sentinel answer such as "no
    /// threshold in range".
    Sentinel(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Sentinel(_) => 4,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Sentinel(m) => write!(f, "{m}"),
            Failure::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<parabolic_core::Error> for Failure {
    fn from(e: parabolic_core::Error) -> Self {
        use parabolic_core::Error as E;
        match e {
            E::ConstantPotential
            | E::NotCritical { .. }
            | E::NotNondegenerateMinimum { .. }
            | E::InvalidExponent(_) => Failure::Validation(e.to_string()),
            E::InvalidInput(m) => Failure::Validation(m.into()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
