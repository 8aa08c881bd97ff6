//! Quadrature point sets on compact manifolds.
//!
//! Points are spread by annealing a Gaussian heat-kernel repulsion energy with
//! Langevin dynamics, weighted by a kernel-matrix solve, and scored against
//! Laplacian eigenfunctions next to classical QMC and Monte Carlo sets.
//!
//! With the default `parallel` feature, per-particle and per-eigenfunction
//! work runs on rayon. Without it everything runs on the calling thread. Both
//! paths produce bit-identical results.

pub mod annealer;
pub mod baselines;
pub mod energy;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod par;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{ManifoldSpec, PointSet};
