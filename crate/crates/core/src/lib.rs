//! Frozen-vortex solutions of the two-dimensional compressible barotropic
//! atmosphere: potentials and pressures, center trajectories, the
//! discrepancy field, a two-step Lax–Wendroff grid solver, and the spherical
//! family.

pub mod cli;
pub mod discrepancy;
pub mod error;
pub mod grid_solver;
pub mod model;
pub mod potential;
pub mod sphere;
pub mod trajectory;

pub use error::{Error, Result};
