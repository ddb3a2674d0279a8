//! Deterministic 6-DOF fixed-wing flight dynamics.

mod aero;
mod atmosphere;
mod config;
mod dynamics;
mod propulsion;
mod trim;

pub use aero::{aero_force_moment, AeroCoefficients, AeroTables, NormalizedRates};
pub use atmosphere::{standard_atmosphere, standard_atmosphere_clamped, AirData};
pub use config::{AircraftConfig, AircraftOverrides, InertiaTensor};
pub use dynamics::{
    aircraft_loads, derivatives, integrate_step, mechanical_energy, step_aircraft, Loads,
    RigidBodyState, StateDerivative, DEFAULT_DT, GRAVITY,
};
pub use propulsion::{propulsion_thrust, ThrustTable};
pub use trim::{trim, TRIM_TOLERANCE};
