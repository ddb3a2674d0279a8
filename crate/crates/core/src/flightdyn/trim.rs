use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use super::config::AircraftConfig;
use super::dynamics::{aircraft_loads, derivatives, RigidBodyState, StateDerivative};
use crate::autopilot::ControlCommand;
use crate::avionics::SurfaceActual;
use crate::error::{Error, Result};

/// Residual threshold for an accepted trim.
pub const TRIM_TOLERANCE: f64 = 1e-6;
const MAX_ITERATIONS: usize = 60;
const SURFACE_LIMIT: f64 = 25.0 * std::f64::consts::PI / 180.0;

/// Straight-and-level state at `(alpha, elevator, throttle)`, heading north.
fn level_state(altitude: f64, airspeed: f64, alpha: f64) -> RigidBodyState {
    RigidBodyState {
        time: 0.0,
        position: Vector3::new(0.0, 0.0, -altitude),
        velocity_body: Vector3::new(airspeed * alpha.cos(), 0.0, airspeed * alpha.sin()),
        attitude: UnitQuaternion::from_euler_angles(0.0, alpha, 0.0),
        angular_rates: Vector3::zeros(),
    }
}

fn evaluate(
    config: &AircraftConfig,
    altitude: f64,
    airspeed: f64,
    x: &Vector3<f64>,
) -> Result<StateDerivative> {
    let state = level_state(altitude, airspeed, x[0]);
    let surfaces = SurfaceActual {
        elevator: x[1],
        aileron: 0.0,
        rudder: 0.0,
        throttle: x[2],
    };
    let loads = aircraft_loads(&state, &surfaces, config)?;
    Ok(derivatives(&state, &loads.force, &loads.moment, config))
}

fn reduced(d: &StateDerivative) -> Vector3<f64> {
    Vector3::new(d.velocity_body.x, d.velocity_body.z, d.angular_rates.y)
}

/// Straight-and-level trim by damped Newton iteration over angle of attack,
/// elevator and throttle (pitch equals angle of attack, wings level).
pub fn trim(
    config: &AircraftConfig,
    altitude: f64,
    airspeed: f64,
) -> Result<(RigidBodyState, ControlCommand)> {
    let fail = |iterations, residual| Error::TrimFailure {
        iterations,
        residual,
    };
    if !(airspeed > 0.0) || airspeed > config.thrust.max_airspeed() {
        return Err(fail(0, f64::INFINITY));
    }
    let (alpha_min, alpha_max) = config.aero.alpha_range();
    let clamp = |x: Vector3<f64>| {
        Vector3::new(
            x[0].clamp(alpha_min, alpha_max),
            x[1].clamp(-SURFACE_LIMIT, SURFACE_LIMIT),
            x[2].clamp(0.0, 1.0),
        )
    };

    let mut x = Vector3::new(2f64.to_radians(), 0.0, 0.5);
    let mut r = reduced(&evaluate(config, altitude, airspeed, &x)?);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let rp = reduced(&evaluate(config, altitude, airspeed, &xp)?);
            let rm = reduced(&evaluate(config, altitude, airspeed, &xm)?);
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        let Some(step) = jac.lu().solve(&(-r)) else {
            return Err(fail(iterations, r.norm()));
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let candidate = clamp(x + step * lambda);
            let rc = reduced(&evaluate(config, altitude, airspeed, &candidate)?);
            if rc.norm() < r.norm() {
                x = candidate;
                r = rc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let full = evaluate(config, altitude, airspeed, &x)?;
        if full.max_equilibrium_component() < TRIM_TOLERANCE * 1e-3 {
            break;
        }
        if !accepted {
            break;
        }
    }

    let full = evaluate(config, altitude, airspeed, &x)?;
    let residual = full.max_equilibrium_component();
    if residual >= TRIM_TOLERANCE {
        return Err(fail(iterations, residual));
    }
    let command = ControlCommand {
        elevator: x[1],
        aileron: 0.0,
        rudder: 0.0,
        throttle: x[2],
    };
    Ok((level_state(altitude, airspeed, x[0]), command))
}
