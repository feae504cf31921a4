use core::fmt;

/// Failures of the numerical pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The potential has no critical structure (`U' ≡ 0`).
    ConstantPotential,
    /// An angle that must be a critical point of `U` is not one.
    NotCritical { angle: f64, derivative: f64 },
    /// A saddle was requested at a configuration with `U'' ≤ 0` or `U'' ≈ 0`.
    NotNondegenerateMinimum { angle: f64, curvature: f64 },
    /// Exponent outside `(0, 2)`.
    InvalidExponent(f64),
    /// Generic invalid argument with a static description.
    InvalidInput(&'static str),
    MaxStepsExceeded { tau: f64, steps: usize },
    StepUnderflow { tau: f64, step: f64 },
    NonFiniteState { tau: f64 },
    /// The manifold left its admissible window without meeting the pericenter line.
    NoCrossing { theta: f64 },
    /// An angle fell outside the domain on which a manifold is a graph over `θ`.
    OutsideGraphDomain { theta: f64, lo: f64, hi: f64 },
    /// The two arcs handed to a reconstruction do not meet.
    NotMatched { gap: f64 },
    /// The jump-angle function has no bracketed root.
    RootNotBracketed { lo: f64, hi: f64 },
    /// A path node sits at (or below) the origin.
    Collision { node: usize },
    /// Descent changed the winding class of a closed loop.
    WindingChanged { expected: i64, found: i64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ConstantPotential => write!(f, "constant potential: U' vanishes identically"),
            Error::NotCritical { angle, derivative } => {
                write!(f, "angle {angle} is not critical (U' = {derivative:e})")
            }
            Error::NotNondegenerateMinimum { angle, curvature } => write!(
                f,
                "angle {angle} is not a nondegenerate minimum (U'' = {curvature:e})"
            ),
            Error::InvalidExponent(a) => write!(f, "exponent {a} outside (0, 2)"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::MaxStepsExceeded { tau, steps } => {
                write!(f, "integration stopped after {steps} steps at tau = {tau}")
            }
            Error::StepUnderflow { tau, step } => {
                write!(f, "step size underflow ({step:e}) at tau = {tau}")
            }
            Error::NonFiniteState { tau } => write!(f, "non-finite state at tau = {tau}"),
            Error::NoCrossing { theta } => {
                write!(f, "manifold reached theta = {theta} without crossing the pericenter line")
            }
            Error::OutsideGraphDomain { theta, lo, hi } => {
                write!(f, "theta = {theta} outside graph domain [{lo}, {hi}]")
            }
            Error::NotMatched { gap } => write!(f, "arcs are not matched (gap = {gap:e})"),
            Error::RootNotBracketed { lo, hi } => {
                write!(f, "jump-angle function has no sign change on [{lo}, {hi}]")
            }
            Error::Collision { node } => write!(f, "path node {node} collides with the origin"),
            Error::WindingChanged { expected, found } => {
                write!(f, "winding changed from {expected} to {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
