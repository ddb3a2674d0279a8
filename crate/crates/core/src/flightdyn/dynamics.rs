use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::aero::aero_force_moment;
use super::atmosphere::standard_atmosphere_clamped;
use super::config::AircraftConfig;
use super::propulsion::propulsion_thrust;
use crate::avionics::SurfaceActual;
use crate::error::{Error, Result};

/// Constant gravitational acceleration, +down, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// Default physics step, s.
pub const DEFAULT_DT: f64 = 0.001;

/// Full 6-DOF truth state in a flat-Earth north-east-down frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyState {
    pub time: f64,
    /// North, east, down, m.
    pub position: Vector3<f64>,
    /// Body-axis velocity u, v, w, m/s.
    pub velocity_body: Vector3<f64>,
    /// Body-to-NED rotation.
    pub attitude: UnitQuaternion<f64>,
    /// Body rates p, q, r, rad/s.
    pub angular_rates: Vector3<f64>,
}

impl RigidBodyState {
    pub fn at_rest(altitude: f64) -> Self {
        RigidBodyState {
            time: 0.0,
            position: Vector3::new(0.0, 0.0, -altitude),
            velocity_body: Vector3::zeros(),
            attitude: UnitQuaternion::identity(),
            angular_rates: Vector3::zeros(),
        }
    }

    /// (roll, pitch, yaw), rad.
    pub fn euler(&self) -> (f64, f64, f64) {
        self.attitude.euler_angles()
    }

    pub fn roll(&self) -> f64 {
        self.euler().0
    }

    pub fn pitch(&self) -> f64 {
        self.euler().1
    }

    pub fn yaw(&self) -> f64 {
        self.euler().2
    }

    pub fn altitude(&self) -> f64 {
        -self.position.z
    }

    pub fn velocity_ned(&self) -> Vector3<f64> {
        self.attitude * self.velocity_body
    }

    pub fn airspeed(&self) -> f64 {
        self.velocity_body.norm()
    }

    pub fn ground_speed(&self) -> f64 {
        let v = self.velocity_ned();
        v.x.hypot(v.y)
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && self.position.iter().all(|v| v.is_finite())
            && self.velocity_body.iter().all(|v| v.is_finite())
            && self.attitude.coords.iter().all(|v| v.is_finite())
            && self.angular_rates.iter().all(|v| v.is_finite())
    }

    pub fn with_heading(mut self, yaw: f64) -> Self {
        let (r, p, _) = self.euler();
        self.attitude = UnitQuaternion::from_euler_angles(r, p, yaw);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position: Vector3<f64>,
    pub velocity_body: Vector3<f64>,
    pub attitude: Quaternion<f64>,
    pub angular_rates: Vector3<f64>,
}

impl StateDerivative {
    /// Components that vanish in straight-and-level equilibrium: body
    /// accelerations, angular accelerations, attitude rate and vertical speed.
    pub fn equilibrium_residual(&self) -> f64 {
        let mut sq = self.velocity_body.norm_squared() + self.angular_rates.norm_squared();
        sq += self.attitude.coords.norm_squared();
        sq += self.position.z * self.position.z;
        sq.sqrt()
    }

    pub fn max_equilibrium_component(&self) -> f64 {
        self.velocity_body
            .iter()
            .chain(self.angular_rates.iter())
            .chain(self.attitude.coords.iter())
            .chain(std::iter::once(&self.position.z))
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Total external force and moment (body axes), excluding gravity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Loads {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

/// Rigid-body Newton-Euler equations with diagonal inertia and constant
/// gravity.
pub fn derivatives(
    state: &RigidBodyState,
    total_force: &Vector3<f64>,
    total_moment: &Vector3<f64>,
    config: &AircraftConfig,
) -> StateDerivative {
    let v = &state.velocity_body;
    let w = &state.angular_rates;
    let gravity_body = state.attitude.inverse_transform_vector(&Vector3::new(0.0, 0.0, GRAVITY));
    let accel = total_force / config.mass + gravity_body - w.cross(v);

    let i = &config.inertia;
    let h = Vector3::new(i.ixx() * w.x, i.iyy() * w.y, i.izz() * w.z);
    let net = total_moment - w.cross(&h);
    let ang_accel = Vector3::new(net.x / i.ixx(), net.y / i.iyy(), net.z / i.izz());

    let q = state.attitude.quaternion();
    let q_dot = q * Quaternion::new(0.0, w.x, w.y, w.z) * 0.5;

    StateDerivative {
        position: state.attitude * v,
        velocity_body: accel,
        attitude: q_dot,
        angular_rates: ang_accel,
    }
}

/// Aerodynamic plus propulsive loads for the given actual surfaces.
pub fn aircraft_loads(
    state: &RigidBodyState,
    surfaces: &SurfaceActual,
    config: &AircraftConfig,
) -> Result<Loads> {
    let altitude = state.altitude();
    let air = standard_atmosphere_clamped(altitude);
    let (fa, ma) = aero_force_moment(state, surfaces, &air, config);
    let thrust = propulsion_thrust(surfaces.throttle, state.airspeed(), altitude, config)?;
    Ok(Loads {
        force: fa + thrust,
        moment: ma,
    })
}

type Packed = [f64; 13];

fn pack(s: &RigidBodyState) -> Packed {
    let q = s.attitude.quaternion();
    [
        s.position.x,
        s.position.y,
        s.position.z,
        s.velocity_body.x,
        s.velocity_body.y,
        s.velocity_body.z,
        q.w,
        q.i,
        q.j,
        q.k,
        s.angular_rates.x,
        s.angular_rates.y,
        s.angular_rates.z,
    ]
}

fn unpack(x: &Packed, time: f64) -> RigidBodyState {
    RigidBodyState {
        time,
        position: Vector3::new(x[0], x[1], x[2]),
        velocity_body: Vector3::new(x[3], x[4], x[5]),
        attitude: UnitQuaternion::from_quaternion(Quaternion::new(x[6], x[7], x[8], x[9])),
        angular_rates: Vector3::new(x[10], x[11], x[12]),
    }
}

fn pack_derivative(d: &StateDerivative) -> Packed {
    [
        d.position.x,
        d.position.y,
        d.position.z,
        d.velocity_body.x,
        d.velocity_body.y,
        d.velocity_body.z,
        d.attitude.w,
        d.attitude.i,
        d.attitude.j,
        d.attitude.k,
        d.angular_rates.x,
        d.angular_rates.y,
        d.angular_rates.z,
    ]
}

#[inline]
fn axpy(x: &Packed, k: &Packed, h: f64) -> Packed {
    let mut out = *x;
    for i in 0..13 {
        out[i] += h * k[i];
    }
    out
}

/// One fixed-step classical Runge-Kutta advance. `loads` is evaluated at each
/// stage; the quaternion is renormalized at every stage and at the end.
pub fn integrate_step<F>(
    state: &RigidBodyState,
    config: &AircraftConfig,
    dt: f64,
    mut loads: F,
) -> Result<RigidBodyState>
where
    F: FnMut(&RigidBodyState) -> Result<Loads>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("integration step must be positive, got {dt}")));
    }
    let diverged = |reason: &str| Error::Diverged {
        time: state.time,
        reason: reason.to_string(),
        last_valid: Box::new(*state),
    };

    let mut stage = |x: &Packed, t: f64| -> Result<Packed> {
        let s = unpack(x, t);
        let l = loads(&s)?;
        if !l.force.iter().chain(l.moment.iter()).all(|v| v.is_finite()) {
            return Err(diverged("non-finite force or moment"));
        }
        let k = pack_derivative(&derivatives(&s, &l.force, &l.moment, config));
        if k.iter().all(|v| v.is_finite()) {
            Ok(k)
        } else {
            Err(diverged("non-finite state derivative"))
        }
    };

    let t0 = state.time;
    let x0 = pack(state);
    let k1 = stage(&x0, t0)?;
    let k2 = stage(&axpy(&x0, &k1, 0.5 * dt), t0 + 0.5 * dt)?;
    let k3 = stage(&axpy(&x0, &k2, 0.5 * dt), t0 + 0.5 * dt)?;
    let k4 = stage(&axpy(&x0, &k3, dt), t0 + dt)?;

    let mut x1 = x0;
    for i in 0..13 {
        x1[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let next = unpack(&x1, t0 + dt);
    if !next.is_finite() {
        return Err(diverged("non-finite state after step"));
    }
    Ok(next)
}

/// Advances the aircraft one step with fixed actual surfaces.
pub fn step_aircraft(
    state: &RigidBodyState,
    surfaces: &SurfaceActual,
    config: &AircraftConfig,
    dt: f64,
) -> Result<RigidBodyState> {
    integrate_step(state, config, dt, |s| aircraft_loads(s, surfaces, config))
}

/// Translational + rotational kinetic energy plus potential energy, J.
pub fn mechanical_energy(state: &RigidBodyState, config: &AircraftConfig) -> f64 {
    let w = &state.angular_rates;
    let i = &config.inertia;
    0.5 * config.mass * state.velocity_body.norm_squared()
        + 0.5 * (i.ixx() * w.x * w.x + i.iyy() * w.y * w.y + i.izz() * w.z * w.z)
        + config.mass * GRAVITY * state.altitude()
}
