//! Sensor and servo fault algebra, the injection catalog, schedules and the
//! per-run injector.

mod algebra;
mod catalog;
mod inject;
mod spec;

pub use algebra::{
    apply_actuator_fault, apply_sensor_fault, ActuatorFaultState, ActuatorMode, ImuChannel, Pulse, SensorFaultState,
    SensorMode,
};
pub use catalog::{gps_fault_params, imu_fault_params, servo_fault_params, FaultKind, FaultLocation};
pub use inject::{gps_fault_transform, FaultInjector};
pub use spec::{
    schedule_active, schedule_from_entries, FaultEntry, FaultMode, FaultSchedule, FaultSpec, FaultStart, FaultTarget,
    GpsMode, PhaseEntries,
};
