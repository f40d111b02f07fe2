//! Monte Carlo verification of integral-geometric mean values for random
//! curves hitting a fixed window.

pub mod bodies;
pub mod cli;
pub mod curves;
pub mod estimators;
pub mod error;
pub mod kinematics;
pub mod theory;
pub(crate) mod vector;

pub use bodies::{Body, BodySpec, Measures};
pub use curves::{Curve, ProcessSpec, StepLengthLaw, Topology};
pub use error::{Error, Result};
pub use kinematics::{intersect, IntersectionResult, RigidMotion};
