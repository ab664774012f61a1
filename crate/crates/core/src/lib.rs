//! Full-body pose estimation from sparse 6DoF tracking.
//!
//! A transformer encoder regresses the global orientation and 21 local joint
//! rotations of a 22-joint skeleton from windows of head/hand tracker
//! features; global translation is recovered through the kinematic chain from
//! the tracked head, and arm joints are optionally refined by a gradient-based
//! inverse-kinematics pass against the tracked hand positions.

// indexed loops over small fixed-size math read clearer than iterator chains
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod autodiff;
pub mod data;
pub mod diffkin;
pub mod error;
pub mod features;
pub mod ik;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod rotations;
pub mod skeleton;
pub mod training;
pub mod vec3;
pub(crate) mod wire;

pub use error::{Error, Result};
