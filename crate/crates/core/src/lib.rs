//! Resolution-complete multi-resolution search for curvature-constrained
//! steerable needles in 3D, with baseline planners and a benchmark harness.

pub mod baselines;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod planner;
pub mod primitives;

pub use error::{Error, Result};
