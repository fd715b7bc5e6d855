//! Distributed RSS-based localization of a stationary emitter by a cluster
//! of UAVs flying known trajectories.
//!
//! The crate provides the path-loss measurement model, four distributed
//! estimators (iterative majorize-minimization and Gauss-Newton, and two
//! one-round fusion schemes over local grid searches), the Cramér-Rao bound,
//! a round-based simulation of the center/edge protocol with exact bit
//! accounting, and a Monte Carlo harness.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which the harness uses.

// `!(x > 0)` is used on purpose so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod crlb;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod scenario;
pub mod simnet;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
pub use linalg::{Axes, Mat3, Vec3};
pub use scalar::Real;
pub use simnet::Method;

pub type Point = Vec3<f64>;
pub type Matrix = Mat3<f64>;
pub type Scenario64 = scenario::Scenario<f64>;
pub type Scenario32 = scenario::Scenario<f32>;
pub type TrajectoryPlan64 = geometry::TrajectoryPlan<f64>;
pub type Aoi64 = geometry::Aoi<f64>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type MeasurementSet64 = channel::MeasurementSet<f64>;
pub type MeasurementSet32 = channel::MeasurementSet<f32>;
pub type PositionEstimate64 = estimators::PositionEstimate<f64>;
pub type FimReport64 = crlb::FimReport<f64>;
pub type ProtocolOptions64 = simnet::ProtocolOptions<f64>;
