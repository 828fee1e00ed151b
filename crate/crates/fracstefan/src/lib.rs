//! One-phase melting with a memory flux.
//!
//! The heat flux in the liquid is tied to the temperature gradient through a
//! power-law memory kernel whose lower limit at each point x is the time h(x)
//! at which that point melted, so every field point carries its own history.
//! The crate provides the fractional-order operators this requires
//! ([`fraccalc`]), the model quantities and residual functionals
//! ([`stefan`]), a front-tracking solver ([`solver`]), and verification
//! diagnostics with refinement studies ([`diagnostics`]).

pub mod diagnostics;
mod error;
pub mod fraccalc;
pub mod solver;
pub mod stefan;

pub use error::{Error, Result};
