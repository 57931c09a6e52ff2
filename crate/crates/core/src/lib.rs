//! Sphere threshold graphs, MaxCut surplus, and vector chromatic number bounds.
//!
//! The crate builds graphs whose vertices are points on `S^{d-1}` joined when
//! their angle is at least `θ`, computes their MaxCut and vector chromatic
//! number, and checks the surplus inequality
//! `sp(G) ≥ m / (π (χ_vec(G) − 1))` together with the finite lemmas that show
//! the constant `π` cannot be improved.

pub mod coloring;
pub mod construction;
pub mod continuous;
pub mod error;
pub mod graph;
pub mod partition;
pub mod rng;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{CutResult, Graph, Surplus};
