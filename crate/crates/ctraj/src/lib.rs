//! Continuous-time trajectory estimation on vector spaces and matrix Lie
//! groups.
//!
//! Two trajectory representations are implemented behind one interpolation
//! contract: Gaussian-process trajectories driven by white-noise-on-jerk or
//! white-noise-on-acceleration motion models, and uniform cumulative
//! B-splines. Shared motion priors, sensor-fusion factors, a block-sparse
//! Levenberg-Marquardt solver, simulators, and a Monte-Carlo benchmark
//! harness allow the two representations to be compared head to head.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability. The `ctbench` binary drives the Monte-Carlo comparisons
//! from a JSON config.

pub mod bench;
pub mod error;
pub mod estimator;
pub mod gp;
mod linalg;
pub mod manifold;
pub mod motion;
pub mod sim;
pub mod spline;

pub use error::{Error, Result};
