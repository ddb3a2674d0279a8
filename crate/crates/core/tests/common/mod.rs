//! Shared invariant checks, run as property tests and by the acceptance
//! target.

#![allow(dead_code)]

use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use uavlab::autopilot::{Autopilot, AutopilotGains, ControlCommand, FailsafeConfig, FailsafeMode, FlightPhase, MissionPlan, Phase, TrimPoint};
use uavlab::avionics::{servo_dynamics, NavSolution, NavSource, ServoChannel, ServoParams, ServoState, SurfaceActual};
use uavlab::faultlab::{
    apply_actuator_fault, apply_sensor_fault, ActuatorFaultState, ActuatorMode, FaultInjector, FaultKind, FaultSchedule,
    FaultStart, ImuChannel, Pulse, SensorFaultState, SensorMode,
};
use uavlab::flightdyn::{mechanical_energy, step_aircraft, AircraftConfig, RigidBodyState};

pub const QUATERNION_TOL: f64 = 1e-9;
pub const ENERGY_REL_TOL: f64 = 1e-6;
pub const ALGEBRA_REL_TOL: f64 = 1e-12;

/// Deterministic runner so failures reproduce.
pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// A flying state at 1000 m with moderate attitude, incidence and rates.
pub fn flight_state() -> impl Strategy<Value = RigidBodyState> {
    (
        15.0..70.0f64,
        -0.1..0.2f64,
        -0.1..0.1f64,
        (-1.0..1.0f64, -0.5..0.5f64, -3.2..3.2f64),
        prop::array::uniform3(-0.5..0.5f64),
    )
        .prop_map(|(v, alpha, beta, (r, p, y), w)| RigidBodyState {
            time: 0.0,
            position: Vector3::new(0.0, 0.0, -1000.0),
            velocity_body: Vector3::new(
                v * alpha.cos() * beta.cos(),
                v * beta.sin(),
                v * alpha.sin() * beta.cos(),
            ),
            attitude: UnitQuaternion::from_euler_angles(r, p, y),
            angular_rates: Vector3::from(w),
        })
}

pub fn surfaces(throttle: impl Strategy<Value = f64>) -> impl Strategy<Value = SurfaceActual> {
    let lim = 25f64.to_radians();
    (-lim..lim, -lim..lim, -lim..lim, throttle).prop_map(|(elevator, aileron, rudder, throttle)| SurfaceActual {
        elevator,
        aileron,
        rudder,
        throttle,
    })
}

const STEPS: usize = 40;
const DT: f64 = 0.001;

pub fn check_quaternion_norm(cases: u32) -> Result<(), String> {
    let cfg = AircraftConfig::default();
    runner(cases)
        .run(&(flight_state(), surfaces(0.0..=1.0f64)), |(mut s, u)| {
            for i in 0..STEPS {
                s = step_aircraft(&s, &u, &cfg, DT).map_err(|e| fail(e.to_string()))?;
                let err = (s.attitude.quaternion().norm() - 1.0).abs();
                prop_assert!(err <= QUATERNION_TOL, "step {i}: |q| - 1 = {err:e}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn check_energy_monotone(cases: u32) -> Result<(), String> {
    let cfg = AircraftConfig::default();
    runner(cases)
        .run(&(flight_state(), surfaces(Just(0.0))), |(mut s, u)| {
            let mut e = mechanical_energy(&s, &cfg);
            for i in 0..STEPS {
                s = step_aircraft(&s, &u, &cfg, DT).map_err(|e| fail(e.to_string()))?;
                let next = mechanical_energy(&s, &cfg);
                prop_assert!(
                    next <= e + ENERGY_REL_TOL * e.abs(),
                    "step {i}: energy rose from {e} to {next}"
                );
                e = next;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn nav_solution() -> impl Strategy<Value = NavSolution> {
    (
        prop::array::uniform3(-1e5..1e5f64),
        prop::array::uniform3(-200.0..200.0f64),
        prop::array::uniform3(-7.0..7.0f64),
        prop::array::uniform3(-20.0..20.0f64),
        0.0..1e4f64,
        any::<bool>(),
    )
        .prop_map(|(p, v, a, w, time, dr)| NavSolution {
            time,
            position: Vector3::from(p),
            velocity: Vector3::from(v),
            attitude: Vector3::from(a),
            rates: Vector3::from(w),
            source: if dr { NavSource::DeadReckoning } else { NavSource::Gps },
        })
}

fn failsafe_mode() -> impl Strategy<Value = FailsafeMode> {
    prop_oneof![
        Just(FailsafeMode::Nominal),
        Just(FailsafeMode::ImuPositioning(0.0)),
        Just(FailsafeMode::LevelFlightFallback(0.0)),
        Just(FailsafeMode::HoldLastRudder(0.0)),
    ]
}

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![
        Just(Phase::Climb),
        Just(Phase::LevelFlight),
        Just(Phase::GlideSlope),
        Just(Phase::Attack)
    ]
}

pub fn check_command_clamping(cases: u32) -> Result<(), String> {
    let lim = 25f64.to_radians();
    let trim = (-lim..lim, -lim..lim, -lim..lim, 0.0..=1.0f64, -0.3..0.3f64).prop_map(|(e, a, r, t, pitch)| TrimPoint {
        command: ControlCommand {
            elevator: e,
            aileron: a,
            rudder: r,
            throttle: t,
        },
        pitch,
    });
    let ticks = prop::collection::vec((nav_solution(), failsafe_mode()), 1..30);
    let raw = prop::array::uniform4(-1e6..1e6f64);
    runner(cases)
        .run(&(trim, phase(), ticks, raw), |(trim, ph, ticks, raw)| {
            let c = ControlCommand {
                elevator: raw[0],
                aileron: raw[1],
                rudder: raw[2],
                throttle: raw[3],
            }
            .clamped(lim);
            prop_assert!(c.within(lim), "clamped {c:?}");

            let gains = AutopilotGains::default();
            let mut ap = Autopilot::new(gains, FailsafeConfig::default(), trim, &ticks[0].0);
            let plan = MissionPlan::default();
            let phase = FlightPhase::new(ph, 0.0, 400.0);
            for (i, (nav, mode)) in ticks.iter().enumerate() {
                let cmd = ap.update(nav, &plan, &phase, *mode, 0.01);
                prop_assert!(cmd.within(gains.surface_limit_deg.to_radians()), "tick {i}: {cmd:?}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn check_servo_limits(cases: u32) -> Result<(), String> {
    let cmds = prop::collection::vec(prop::array::uniform4(-10.0..10.0f64), 1..200);
    runner(cases)
        .run(&cmds, |cmds| {
            let params = ServoParams::default();
            let dt = 0.001;
            let max_step = params.rate_limit_deg_s.to_radians() * dt;
            let mut st = ServoState::default();
            for c in cmds {
                let cmd = ControlCommand {
                    elevator: c[0],
                    aileron: c[1],
                    rudder: c[2],
                    throttle: c[3],
                };
                let before = st.positions;
                let out = servo_dynamics(&cmd, &mut st, &params, dt);
                prop_assert!((0.0..=1.0).contains(&out.throttle));
                for ch in ServoChannel::ALL {
                    let x = out.get(ch);
                    prop_assert!(x.abs() <= params.limit(), "{} at {x}", ch.name());
                    prop_assert!((x - before[ch.index()]).abs() <= max_step * (1.0 + 1e-12));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// After a stuck fault starts, the faulted command and the actual surface
/// equal the position at onset exactly, whatever the autopilot asks for.
pub fn check_stuck_latch(cases: u32) -> Result<(), String> {
    let cmds = prop::collection::vec(prop::array::uniform3(-0.5..0.5f64), 20..300);
    runner(cases)
        .run(&(cmds, 0usize..20), |(cmds, onset_tick)| {
            let dt = 0.01;
            let onset = onset_tick as f64 * dt;
            let specs = FaultKind::ServoStuck.specs(FaultStart::At(onset), f64::INFINITY);
            let mut inj = FaultInjector::new(FaultSchedule::new(specs).map_err(|e| fail(e.to_string()))?, 7);
            let params = ServoParams::default();
            let mut st = ServoState::default();
            let mut latched: Option<[f64; 3]> = None;
            for (i, c) in cmds.iter().enumerate() {
                let t = i as f64 * dt;
                inj.begin_tick(t);
                let cmd = ControlCommand {
                    elevator: c[0],
                    aileron: c[1],
                    rudder: c[2],
                    throttle: 0.5,
                };
                let at_tick = st.positions;
                let out = inj.apply_servo(&cmd, &at_tick, t, dt);
                if t >= onset {
                    let l = *latched.get_or_insert(at_tick);
                    for ch in ServoChannel::ALL {
                        prop_assert_eq!(out.get(ch), l[ch.index()]);
                    }
                }
                for _ in 0..10 {
                    servo_dynamics(&out, &mut st, &params, dt / 10.0);
                }
                if let Some(l) = latched {
                    prop_assert_eq!(st.positions, l);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Labels reported by the injector are exactly the specs whose window
/// `[start, start + duration)` contains t.
pub fn check_label_fidelity(cases: u32) -> Result<(), String> {
    let kinds = prop::sample::subsequence(FaultKind::ALL.to_vec(), 0..5);
    let windows = prop::collection::vec((0.0..100.0f64, 0.1..50.0f64), 5);
    let times = prop::collection::vec(0.0..160.0f64, 1..40);
    runner(cases)
        .run(&(kinds, windows, times), |(kinds, windows, times)| {
            // kinds on distinct subsystems never share a channel
            let mut seen = std::collections::HashSet::new();
            let kinds: Vec<FaultKind> = kinds.into_iter().filter(|k| seen.insert(k.location())).collect();
            let mut specs = Vec::new();
            let mut expected = Vec::new();
            for (k, (start, dur)) in kinds.iter().zip(&windows) {
                for s in k.specs(FaultStart::At(*start), *dur) {
                    expected.push((format!("{}@{}", s.label, s.target), *start, *dur));
                    specs.push(s);
                }
            }
            let mut inj = FaultInjector::new(FaultSchedule::new(specs).map_err(|e| fail(e.to_string()))?, 1);
            for t in times {
                inj.begin_tick(t);
                let mut got = inj.labels();
                got.sort();
                let mut want: Vec<String> = expected
                    .iter()
                    .filter(|(_, s, d)| *s <= t && t < s + d)
                    .map(|(l, _, _)| l.clone())
                    .collect();
                want.sort();
                prop_assert_eq!(got, want, "t = {}", t);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= ALGEBRA_REL_TOL * a.abs().max(b.abs())
}

fn sensor_mode() -> impl Strategy<Value = SensorMode> {
    prop_oneof![
        Just(SensorMode::FaultFree),
        (0.1..3.0f64).prop_map(|gain| SensorMode::Multiplicative { gain }),
        (-10.0..10.0f64).prop_map(|bias| SensorMode::ConstantDeviation { bias }),
        (-1.0..1.0f64, 1.0..100.0f64).prop_map(|(rate, ramp_s)| SensorMode::Drift { rate, ramp_s }),
        prop::collection::vec((0.0..400.0f64, 0.1..50.0f64, -5.0..5.0f64), 1..4).prop_map(|ps| {
            SensorMode::TransientDrift {
                pulses: ps
                    .into_iter()
                    .map(|(offset_s, width_s, amplitude)| Pulse { offset_s, width_s, amplitude })
                    .collect(),
            }
        }),
        Just(SensorMode::Disconnect),
    ]
}

/// Closed-form `k y + d` for each sensor mode, written out independently of
/// the mode's own k/d accessors.
fn sensor_oracle(mode: &SensorMode, y: f64, elapsed: f64) -> f64 {
    match *mode {
        SensorMode::FaultFree => y,
        SensorMode::Multiplicative { gain } => gain * y,
        SensorMode::ConstantDeviation { bias } => y + bias,
        SensorMode::Drift { rate, ramp_s } => y + rate * elapsed.min(ramp_s),
        SensorMode::Disconnect => 0.0,
        SensorMode::TransientDrift { ref pulses } => {
            let mut out = y;
            for p in pulses {
                if p.offset_s <= elapsed && elapsed < p.offset_s + p.width_s {
                    out += p.amplitude;
                }
            }
            out
        }
    }
}

/// A servo mode and a time since onset. Jitter times keep at least 1 ms
/// away from an on/off boundary.
fn actuator_case() -> impl Strategy<Value = (ActuatorMode, f64)> {
    let elapsed = 0.0..500.0f64;
    prop_oneof![
        elapsed.clone().prop_map(|t| (ActuatorMode::FaultFree, t)),
        (-0.2..0.2f64, elapsed.clone()).prop_map(|(bias, t)| (ActuatorMode::ConstantDeviation { bias }, t)),
        elapsed.clone().prop_map(|t| (ActuatorMode::Stuck, t)),
        (0.01..0.99f64, elapsed.clone()).prop_map(|(gain, t)| (ActuatorMode::Damage { gain }, t)),
        (0.5..0.99f64, 0.001..0.1f64, 0.1..5.0f64, elapsed)
            .prop_map(|(gain, sigma, tau_s, t)| (ActuatorMode::Loose { gain, sigma, tau_s }, t)),
        (-0.5..0.9f64, 0.05..1.0f64, 0.05..1.0f64, 0u32..400, 0.0..1.0f64, any::<bool>()).prop_map(
            |(fault_gain, on_s, off_s, n, frac, in_on)| {
                let phase = if in_on {
                    0.001 + frac * (on_s - 0.002)
                } else {
                    on_s + 0.001 + frac * (off_s - 0.002)
                };
                (ActuatorMode::Jitter { fault_gain, on_s, off_s }, n as f64 * (on_s + off_s) + phase)
            }
        ),
    ]
}

fn actuator_oracle(mode: ActuatorMode, u: f64, latched: f64, wander: f64, elapsed: f64) -> f64 {
    match mode {
        ActuatorMode::FaultFree => u,
        ActuatorMode::ConstantDeviation { bias } => u + bias,
        ActuatorMode::Stuck => latched,
        ActuatorMode::Damage { gain } => gain * u,
        ActuatorMode::Loose { gain, .. } => gain * u + wander,
        ActuatorMode::Jitter { fault_gain, on_s, off_s } => {
            let cycles = (elapsed / (on_s + off_s)).floor();
            if elapsed - cycles * (on_s + off_s) < on_s {
                fault_gain * u
            } else {
                u
            }
        }
    }
}

/// Sensor and servo fault outputs against their closed forms.
pub fn check_fault_algebra(cases: u32) -> Result<(), String> {
    let sensor = (sensor_mode(), -1e3..1e3f64, 0.0..500.0f64);
    let actuator = (actuator_case(), -0.5..0.5f64, -0.5..0.5f64, -0.1..0.1f64);
    runner(cases)
        .run(&(sensor, actuator), |((sm, y, el), ((am, t), u, latched, wander))| {
            let onset = 10.0;
            let s = SensorFaultState {
                channel: ImuChannel::Roll,
                mode: sm.clone(),
                onset,
            };
            let got = apply_sensor_fault(y, &s, onset + el);
            let want = sensor_oracle(&sm, y, el);
            prop_assert!(rel_close(got, want), "{sm:?}: {got} vs {want}");
            let mut a = ActuatorFaultState::new(ServoChannel::Elevator, am, onset, latched);
            a.wander = wander;
            let got = apply_actuator_fault(u, &a, onset + t);
            let want = actuator_oracle(am, u, latched, wander, t);
            prop_assert!(rel_close(got, want), "{am:?}: {got} vs {want}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Jitter gain depends only on the phase within its period.
pub fn check_jitter_periodicity(cases: u32) -> Result<(), String> {
    let params = (0.05..1.0f64, 0.05..1.0f64, -0.5..0.9f64, 0.02..0.98f64, 0u32..500);
    runner(cases)
        .run(&params, |(on_s, off_s, fault_gain, frac, n)| {
            let period = on_s + off_s;
            let boundary = on_s / period;
            prop_assume!((frac - boundary).abs() > 1e-3);
            let mode = ActuatorMode::Jitter { fault_gain, on_s, off_s };
            let f = ActuatorFaultState::new(ServoChannel::Aileron, mode, 3.0, 0.0);
            let t0 = 3.0 + frac * period;
            let want = if frac < boundary { fault_gain } else { 1.0 };
            prop_assert_eq!(f.k(t0), want);
            prop_assert_eq!(f.k(t0 + n as f64 * period), want);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
