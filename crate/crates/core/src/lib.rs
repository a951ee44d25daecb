//! Pseudo-spectral simulation of 3D incompressible viscous-resistive MHD on
//! the periodic torus, with cutoff-functional diagnostics, closed-form
//! inertial-range bounds, and an inequality harness that checks those bounds
//! against live simulation data.

pub mod bounds;
pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod smooth;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
