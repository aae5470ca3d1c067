//! Design and verification toolkit for multilayer circuit-QED devices.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`] holds truncated multimode Hilbert spaces, dense operators,
//!   density-matrix states and an adaptive Lindblad integrator.
//! * [`circuit`] maps the lumped capacitance network and junction parameters
//!   onto coupling rates, the transmon spectrum and the multimode dispersive
//!   Hamiltonian.
//! * [`geometry`] has the closed-form electrode curves and dipole limits.
//! * [`budget`] implements seam admittance/conductance loss accounting.
//! * [`experiments`] simulates the measurement protocols and [`fitting`]
//!   reduces the resulting traces to parameters.
//! * [`verify`] bundles the acceptance checks used by the test suite and the
//!   `cqed verify` command.
//!
//! All frequencies are angular (rad/s) inside the crate. Values quoted as
//! `f/2π` in Hz are converted at the boundary with [`units::hz_to_angular`].
//!
//! Data-parallel loops (delay sweeps, Monte Carlo trials, spectrum grids) go
//! through [`sweep`], which uses rayon when the `parallel` feature is on and
//! falls back to plain iterators otherwise.

// Guards written as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod circuit;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod geometry;
pub mod quantum;
pub mod sweep;
pub mod units;
pub mod verify;

pub use error::{Error, Result};
