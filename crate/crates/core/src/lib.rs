//! Mixed virtual element discretization of the stationary Boussinesq problem
//! with temperature-dependent viscosity and conductivity.
//!
//! The unknowns are the pseudostress `σ`, velocity `u`, vorticity `γ`,
//! pseudoheat `ρ` and temperature `φ`. Pseudostress and pseudoheat live in
//! H(div)-conforming virtual element spaces on general polygons, the other
//! three fields are broken polynomials.
//!
//! Module map:
//! - [`mesh`]: polygonal meshes, generators and diagnostics
//! - [`polyspace`]: scaled monomials, polygon quadrature, L² projections
//! - [`vemlocal`]: per-element virtual spaces, projectors and local forms
//! - [`assembly`]: global numbering and sparse system assembly
//! - [`solver`]: Picard and Newton drivers over a sparse LU
//! - [`postprocess`]: pressure recovery, error norms, rates, VTK export
//! - [`experiment`]: configured runs of the three reference experiments

pub mod assembly;
pub mod error;
pub mod experiment;
pub mod manufactured;
pub mod mesh;
pub mod model;
pub mod polyspace;
pub mod postprocess;
pub mod solver;
pub mod vemlocal;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

/// Points and vectors in the plane.
pub type Point = nalgebra::Vector2<f64>;
