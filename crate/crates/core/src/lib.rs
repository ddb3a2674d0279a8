//! Fixed-wing UAV fault-injection laboratory.
//!
//! A 6-DOF simulation under a cascaded autopilot, parametric sensor and servo
//! fault injection, labeled telemetry recording, batch campaigns and a
//! rule-based damage analysis of the recorded flights.

// `!(x > 0.0)` is used on purpose so NaN is rejected with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autopilot;
pub mod avionics;
pub mod campaign;
pub mod damage;
pub mod error;
pub mod faultlab;
pub mod flightdyn;
pub mod grid;

pub use error::{Error, Result};
