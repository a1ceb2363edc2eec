//! Simulation and verification toolkit for nonideal Stern-Gerlach setups.
//!
//! - [`packets`]: setup parameters and exact Gaussian spinor components.
//! - [`metrics`]: inner-product and position-overlap metrics, saturation,
//!   half-plane probabilities and the `M_s ≥ I` constraint.
//! - [`signal`]: EPR-Bohm expectation values with and without the spin flip.
//! - [`solver`]: split-step Fourier integration of the Pauli equation on an
//!   (x, z) grid.
//! - [`families`]: random complex test functions for the modulus inequality.

pub mod error;
pub mod families;
pub mod metrics;
pub mod packets;
pub mod quadrature;
pub mod signal;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use packets::{Branch, DerivedParams, SGParams};
