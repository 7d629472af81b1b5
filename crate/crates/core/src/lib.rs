//! Dynamics, control, and controller distillation for a pendulum-driven
//! capsule moving on a surface with Coulomb stick-slip friction.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats, the command line and parallel
//! drivers live in the `capsule` crate.
//!
//! - [`model`]: dimensionless equations of motion, contact forces and the
//!   stick/slip mode decision.
//! - [`sim`]: event-driven RK4 integration of the hybrid system.
//! - [`control`]: the truncated Fourier open-loop law and the neural
//!   closed-loop law.
//! - [`neural`]: a single-hidden-layer regression network with Adam training
//!   and the activation/width grid.
//! - [`robustness`]: a random, segment-wise friction field and the
//!   perturbation sweep comparing two controllers.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod control;
mod error;
pub mod model;
pub mod neural;
pub mod robustness;
mod seeds;
pub mod sim;

pub use error::{Error, Result};
pub use seeds::derive_seed;
