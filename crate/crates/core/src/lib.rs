//! Radial laboratory for the focusing-defocusing combined NLS with an
//! inverse-square potential,
//!
//! ```text
//! i u_t = L_a u - |u|^{4/(d-2)} u + |u|^{4/(d-1)} u,    L_a = -Δ + a/|x|²,
//! ```
//!
//! in dimensions 3 to 5, restricted to radial data.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod modulation;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod virial;

pub use error::{LabError, Result};
pub use grid::{RadialField, RadialGrid};
pub use params::PhysParams;
