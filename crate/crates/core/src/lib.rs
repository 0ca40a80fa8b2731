//! Numerical calculus on anisotropic Heisenberg groups.
//!
//! The crate builds the step-two Carnot groups generated by the vector
//! fields `X_j = d/dx_j -+ L x d/dt`, evaluates the horizontal p- and
//! infinity-Laplace operators through exact second-order jets, and verifies
//! at machine precision that the closed-form gauge and fundamental-solution
//! formulas are harmonic — including the counterexample where orthonormal
//! operators break infinity-harmonicity.
//!
//! Module map:
//! - [`lie`]: algebra structure, both inner products, Heisenberg-type test
//! - [`group`]: exponential coordinates, group law, dilations
//! - [`jets`]: forward-mode second-order differentiation and the fields
//! - [`operators`]: horizontal gradient, Hessian, divergence, Laplacians
//! - [`gauges`]: the gauge `rho`, `Gamma_p`, and the counterexample norm
//! - [`quadrature`]: seeded Monte Carlo over gauge balls (`omega_p`)
//! - [`verify`]: residual reports for all harmonicity/invariance claims
//!
//! With the default `parallel` feature, point batches and sample streams
//! run on rayon; results are bit-identical to the sequential fallback.

pub mod error;
mod exec;
pub mod gauges;
pub mod group;
pub mod jets;
pub mod lie;
pub mod operators;
pub mod quadrature;
pub mod verify;

pub use error::{CarnotError, Result};
pub use group::Point;
pub use lie::{GroupConfig, LawConvention, MetricMode};
