//! Simulation and verification toolkit for decorated Poisson point processes,
//! their shift-Laplace functionals, and branching Brownian motion extremes.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod bbm;
pub mod error;
pub mod ext_real;
pub mod extract;
pub mod laplace;
pub mod point;
pub mod real;
pub mod samplers;
pub mod seed;
pub mod stats;
pub mod suite;
pub mod test_function;

pub use error::{Error, Result};
pub use point::{Checked, FaithfulnessWarning, Interval};
pub use real::Real;
pub use seed::SeedPath;
pub use test_function::TestFunction;

pub type PointConfiguration = point::Configuration<f64>;
pub type PointConfigurationF32 = point::Configuration<f32>;
