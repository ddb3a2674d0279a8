use std::collections::VecDeque;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::avionics::{wrap_angle, GeoOrigin, GpsReading, ImuReading, MIN_VALID_SATELLITES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "entered_at", rename_all = "snake_case")]
pub enum FailsafeMode {
    Nominal,
    ImuPositioning(f64),
    LevelFlightFallback(f64),
    HoldLastRudder(f64),
}

impl FailsafeMode {
    pub fn name(&self) -> &'static str {
        match self {
            FailsafeMode::Nominal => "nominal",
            FailsafeMode::ImuPositioning(_) => "imu_positioning",
            FailsafeMode::LevelFlightFallback(_) => "level_flight_fallback",
            FailsafeMode::HoldLastRudder(_) => "hold_last_rudder",
        }
    }

    pub fn entered_at(&self) -> Option<f64> {
        match *self {
            FailsafeMode::Nominal => None,
            FailsafeMode::ImuPositioning(t)
            | FailsafeMode::LevelFlightFallback(t)
            | FailsafeMode::HoldLastRudder(t) => Some(t),
        }
    }
}

/// Throttle policy while surfaces are frozen after an IMU failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldThrottle {
    #[default]
    Zero,
    Maintain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FailsafeConfig {
    pub divergence_window_s: f64,
    pub fallback_pitch_deg: f64,
    pub deception_jump_m: f64,
    pub deception_delay_s: f64,
    /// Fix treated as lost when no epoch arrives for this long.
    pub gps_timeout_s: f64,
    pub imu_residual_deg_s: f64,
    pub imu_window_s: f64,
    pub imu_sustain_s: f64,
    pub hold_throttle: HoldThrottle,
}

impl Default for FailsafeConfig {
    fn default() -> Self {
        FailsafeConfig {
            divergence_window_s: 30.0,
            fallback_pitch_deg: 3.0,
            deception_jump_m: 1000.0,
            deception_delay_s: 1.0,
            gps_timeout_s: 0.5,
            imu_residual_deg_s: 0.2,
            imu_window_s: 5.0,
            imu_sustain_s: 8.0,
            hold_throttle: HoldThrottle::Zero,
        }
    }
}

impl FailsafeConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        let positive = [
            self.divergence_window_s,
            self.deception_jump_m,
            self.gps_timeout_s,
            self.imu_residual_deg_s,
            self.imu_window_s,
        ];
        if positive.iter().any(|v| !(*v > 0.0))
            || !(self.deception_delay_s >= 0.0)
            || !(self.imu_sustain_s >= 0.0)
            || !self.fallback_pitch_deg.is_finite()
        {
            return Err(crate::error::Error::Config(format!("invalid failsafe settings {self:?}")));
        }
        Ok(())
    }
}

/// Failsafe transition for one control tick.
///
/// GPS loss moves Nominal to IMU positioning, which falls back to level flight
/// once the divergence window expires. An unhealthy IMU freezes the last
/// command from Nominal or IMU positioning. The fallback and frozen modes are
/// absorbing.
pub fn failsafe_step(
    failsafe: FailsafeMode,
    gps_valid: bool,
    imu_healthy: bool,
    clock: f64,
    config: &FailsafeConfig,
) -> FailsafeMode {
    match failsafe {
        FailsafeMode::Nominal | FailsafeMode::ImuPositioning(_) if !imu_healthy => {
            FailsafeMode::HoldLastRudder(clock)
        }
        FailsafeMode::Nominal if !gps_valid => FailsafeMode::ImuPositioning(clock),
        FailsafeMode::ImuPositioning(t0) if clock - t0 >= config.divergence_window_s - 1e-9 => {
            FailsafeMode::LevelFlightFallback(clock)
        }
        other => other,
    }
}

/// Ground-station view of GPS validity.
#[derive(Debug, Clone)]
pub struct GpsMonitor {
    origin: GeoOrigin,
    last_epoch: Option<(f64, f64, f64)>,
    deception_flag_at: Option<f64>,
    started_at: f64,
    last_fix_ok: bool,
}

impl GpsMonitor {
    pub fn new(origin: GeoOrigin, start_time: f64) -> Self {
        GpsMonitor {
            origin,
            last_epoch: None,
            deception_flag_at: None,
            started_at: start_time,
            last_fix_ok: true,
        }
    }

    /// Feeds the epoch received this tick (if any) and returns whether the fix
    /// may be used for positioning.
    pub fn update(&mut self, reading: Option<&GpsReading>, now: f64, config: &FailsafeConfig) -> bool {
        if let Some(g) = reading {
            let (n, e) = self.origin.to_local(g.latitude_deg, g.longitude_deg);
            if let Some((_, pn, pe)) = self.last_epoch {
                if self.deception_flag_at.is_none() && (n - pn).hypot(e - pe) > config.deception_jump_m {
                    self.deception_flag_at = Some(now + config.deception_delay_s);
                }
            }
            self.last_epoch = Some((now, n, e));
        }
        let deceived = self.deception_flag_at.is_some_and(|t| now >= t - 1e-9);
        let last_time = self.last_epoch.map_or(self.started_at, |(t, _, _)| t);
        let fresh = now - last_time <= config.gps_timeout_s + 1e-9;
        let fix_ok = match reading {
            Some(g) => g.fix_valid && g.satellites >= MIN_VALID_SATELLITES,
            None => self.last_fix_ok,
        };
        self.last_fix_ok = fix_ok;
        fresh && fix_ok && !deceived
    }
}

/// Flags an IMU whose attitude stream disagrees with its own rate stream.
///
/// Over a sliding window the change in measured Euler angles is compared with
/// the integral of the Euler kinematics driven by the measured body rates. A
/// residual slope above the threshold held for the sustain time, or a false
/// health flag, marks the unit unhealthy. Latched.
#[derive(Debug, Clone, Default)]
pub struct ImuMonitor {
    // (time, attitude, cumulative kinematic integral)
    history: VecDeque<(f64, Vector3<f64>, Vector3<f64>)>,
    cumulative: Vector3<f64>,
    last: Option<(f64, Vector3<f64>)>,
    exceed_since: Option<f64>,
    failed: bool,
    last_residual: f64,
}

fn euler_rates(att: &Vector3<f64>, rates: &Vector3<f64>) -> Vector3<f64> {
    let (sr, cr) = att.x.sin_cos();
    let ct = att.y.cos().max(1e-3);
    let tt = att.y.tan();
    let (p, q, r) = (rates.x, rates.y, rates.z);
    Vector3::new(
        p + (q * sr + r * cr) * tt,
        q * cr - r * sr,
        (q * sr + r * cr) / ct,
    )
}

impl ImuMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Latest residual slope, rad/s (0 until the window fills).
    pub fn residual(&self) -> f64 {
        self.last_residual
    }

    pub fn update(&mut self, imu: &ImuReading, config: &FailsafeConfig) -> bool {
        if self.failed {
            return false;
        }
        if !imu.healthy {
            self.failed = true;
            return false;
        }
        let t = imu.timestamp;
        let kin = euler_rates(&imu.attitude, &imu.rates);
        if let Some((t_prev, k_prev)) = self.last {
            self.cumulative += (k_prev + kin) * (0.5 * (t - t_prev));
        }
        self.last = Some((t, kin));
        self.history.push_back((t, imu.attitude, self.cumulative));
        while self
            .history
            .get(1)
            .is_some_and(|(t1, _, _)| t - *t1 >= config.imu_window_s - 1e-9)
        {
            self.history.pop_front();
        }
        let (t0, a0, c0) = self.history[0];
        let span = t - t0;
        if span < config.imu_window_s - 1e-9 {
            return true;
        }
        let d = imu.attitude - a0;
        let measured = Vector3::new(d.x, d.y, wrap_angle(d.z));
        let residual = (measured - (self.cumulative - c0)).amax() / span;
        self.last_residual = residual;
        if residual > config.imu_residual_deg_s.to_radians() {
            let since = *self.exceed_since.get_or_insert(t);
            if t - since >= config.imu_sustain_s - 1e-9 {
                self.failed = true;
                return false;
            }
        } else {
            self.exceed_since = None;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avionics::{gps_measure, GpsNoise, rng_stream};
    use crate::flightdyn::RigidBodyState;

    fn cfg() -> FailsafeConfig {
        FailsafeConfig::default()
    }

    #[test]
    fn nominal_with_valid_fix_stays() {
        assert_eq!(failsafe_step(FailsafeMode::Nominal, true, true, 5.0, &cfg()), FailsafeMode::Nominal);
    }

    #[test]
    fn gps_loss_then_fallback_after_window() {
        let mut m = FailsafeMode::Nominal;
        let mut t: f64 = 130.0;
        let mut fallback_at = None;
        while t < 200.0 {
            let gps_ok = t < 136.0 - 1e-9;
            m = failsafe_step(m, gps_ok, true, t, &cfg());
            if let (FailsafeMode::LevelFlightFallback(at), None) = (m, fallback_at) {
                fallback_at = Some(at);
            }
            if (t - 136.0).abs() < 1e-6 {
                assert!(matches!(m, FailsafeMode::ImuPositioning(_)));
            }
            t = ((t + 0.01) * 100.0).round() / 100.0;
        }
        assert!((fallback_at.unwrap() - 166.0).abs() < 1e-6);
    }

    #[test]
    fn imu_failure_freezes() {
        let m = failsafe_step(FailsafeMode::Nominal, true, false, 50.0, &cfg());
        assert_eq!(m, FailsafeMode::HoldLastRudder(50.0));
        assert_eq!(failsafe_step(m, false, true, 90.0, &cfg()), m);
    }

    #[test]
    fn fallback_is_absorbing() {
        let m = FailsafeMode::LevelFlightFallback(10.0);
        for (g, i) in [(true, true), (false, false), (true, false), (false, true)] {
            assert_eq!(failsafe_step(m, g, i, 100.0, &cfg()), m);
        }
    }

    fn reading(t: f64, north: f64, sats: u32) -> GpsReading {
        let mut s = RigidBodyState::at_rest(400.0);
        s.time = t;
        s.position.x = north;
        let mut r = gps_measure(&s, &GeoOrigin::default(), &GpsNoise::zero(), &mut rng_stream(0, 2));
        r.set_satellites(sats);
        r
    }

    #[test]
    fn deception_flagged_after_delay() {
        let c = cfg();
        let mut m = GpsMonitor::new(GeoOrigin::default(), 0.0);
        assert!(m.update(Some(&reading(0.0, 0.0, 15)), 0.0, &c));
        assert!(m.update(Some(&reading(0.1, 4.0, 15)), 0.1, &c));
        assert!(m.update(Some(&reading(0.2, 5600.0, 15)), 0.2, &c));
        assert!(m.update(Some(&reading(1.1, 5604.0, 15)), 1.1, &c));
        assert!(!m.update(Some(&reading(1.2, 5608.0, 15)), 1.2, &c));
    }

    #[test]
    fn weak_signal_valid_weaker_invalid() {
        let c = cfg();
        let mut m = GpsMonitor::new(GeoOrigin::default(), 0.0);
        assert!(m.update(Some(&reading(0.0, 0.0, 12)), 0.0, &c));
        assert!(!m.update(Some(&reading(0.1, 0.0, 7)), 0.1, &c));
    }

    #[test]
    fn interruption_times_out() {
        let c = cfg();
        let mut m = GpsMonitor::new(GeoOrigin::default(), 0.0);
        assert!(m.update(Some(&reading(0.0, 0.0, 15)), 0.0, &c));
        assert!(m.update(None, 0.5, &c));
        assert!(!m.update(None, 0.51, &c));
    }

    fn imu(t: f64, roll: f64, p: f64) -> ImuReading {
        ImuReading {
            timestamp: t,
            attitude: Vector3::new(roll, 0.0, 1.0),
            rates: Vector3::new(p, 0.0, 0.0),
            accel: Vector3::zeros(),
            healthy: true,
        }
    }

    #[test]
    fn consistent_imu_stays_healthy() {
        let c = cfg();
        let mut m = ImuMonitor::new();
        for i in 0..6000 {
            let t = i as f64 * 0.01;
            let roll = 0.3 * (0.2 * t).sin();
            assert!(m.update(&imu(t, roll, 0.06 * (0.2 * t).cos()), &c));
        }
        assert!(m.residual() < 1e-3);
    }

    #[test]
    fn drifting_attitude_detected_after_sustain() {
        let c = cfg();
        let mut m = ImuMonitor::new();
        let rate = 0.5f64.to_radians();
        let mut failed_at = None;
        for i in 0..6000 {
            let t = i as f64 * 0.01;
            let roll = if t > 10.0 { rate * (t - 10.0) } else { 0.0 };
            if !m.update(&imu(t, roll, 0.0), &c) && failed_at.is_none() {
                failed_at = Some(t);
            }
        }
        let at = failed_at.expect("drift detected");
        assert!(at > 18.0 && at < 25.0, "{at}");
    }

    #[test]
    fn single_step_is_not_drift() {
        let c = cfg();
        let mut m = ImuMonitor::new();
        for i in 0..6000 {
            let t = i as f64 * 0.01;
            let roll = if t > 10.0 { 3f64.to_radians() } else { 0.0 };
            assert!(m.update(&imu(t, roll, 0.0), &c));
        }
    }

    #[test]
    fn unhealthy_flag_latches() {
        let c = cfg();
        let mut m = ImuMonitor::new();
        assert!(!m.update(&ImuReading::disconnected(1.0), &c));
        assert!(!m.update(&imu(1.01, 0.0, 0.0), &c));
    }
}
