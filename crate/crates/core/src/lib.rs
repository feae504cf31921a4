//! Parabolic (zero-energy, homoclinic-to-infinity) motions of planar
//! `(-α)`-homogeneous potentials `V(r, θ) = U(θ) / r^α`.
//!
//! The crate computes the threshold exponent `ᾱ` at which a parabolic
//! trajectory joins two minimal central configurations, reconstructs the
//! trajectory and its constrained deformations for other exponents, and
//! cross-checks the picture with direct discretized action minimization.
//!
//! Layout:
//! - [`potential`]: the angular factor `U` as a trigonometric polynomial and its
//!   central configurations.
//! - [`phase_plane`]: the first-order `(θ, φ)` reduction, equilibria and saddle
//!   linearization; [`integrator`] is the embedded Runge–Kutta 5(4) driver
//!   with dense output and event location.
//! - [`manifolds`]: apsidal angles `θ̂∓(α)` of the saddle manifolds.
//! - [`threshold`]: the gap function, closed-form bounds, bisection for `ᾱ` and
//!   the winding reduction.
//! - [`trajectory`]: physical-time reconstruction and constrained minimizers.
//! - [`variational`]: discretized action / Maupertuis functionals, projected
//!   Newton minimization with sector and obstacle constraints, and the
//!   second-variation probe.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, the CLI and
//! rendering live in the `parabolic` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod integrator;
pub mod manifolds;
pub mod phase_plane;
pub mod potential;
pub mod threshold;
pub mod trajectory;
pub mod variational;

pub use error::Error;
pub use potential::{CentralConfiguration, CriticalKind, TrigPolynomial};

pub type Result<T> = core::result::Result<T, Error>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
