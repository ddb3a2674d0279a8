use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aero::AeroTables;
use super::propulsion::ThrustTable;
use crate::error::{Error, Result};

/// Principal moments of inertia, kg m^2. Products of inertia are zero: the
/// airframe is symmetric about its x-z plane with uniform mass distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaTensor {
    ixx: f64,
    iyy: f64,
    izz: f64,
}

impl InertiaTensor {
    pub fn new(ixx: f64, iyy: f64, izz: f64) -> Result<Self> {
        let all = [ixx, iyy, izz];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config(format!(
                "inertia diagonal must be positive, got {all:?}"
            )));
        }
        if ixx + iyy < izz || iyy + izz < ixx || ixx + izz < iyy {
            return Err(Error::Config(format!(
                "inertia {all:?} violates the triangle inequalities"
            )));
        }
        Ok(InertiaTensor { ixx, iyy, izz })
    }

    /// Radius-of-gyration estimate from mass and overall dimensions:
    /// `I = m (L R / 2)^2` with reference lengths span, body length and their
    /// mean for roll, pitch and yaw, and non-dimensional radii 0.25 / 0.38 /
    /// 0.39 typical of small single-engine aircraft.
    pub fn from_geometry(mass: f64, wingspan: f64, body_length: f64) -> Result<Self> {
        let i = |len: f64, radius: f64| mass * (len * radius / 2.0).powi(2);
        InertiaTensor::new(
            i(wingspan, 0.25),
            i(body_length, 0.38),
            i(0.5 * (wingspan + body_length), 0.39),
        )
    }

    pub fn ixx(&self) -> f64 {
        self.ixx
    }
    pub fn iyy(&self) -> f64 {
        self.iyy
    }
    pub fn izz(&self) -> f64 {
        self.izz
    }
    pub fn ixy(&self) -> f64 {
        0.0
    }
    pub fn iyz(&self) -> f64 {
        0.0
    }
    pub fn ixz(&self) -> f64 {
        0.0
    }
}

pub const DEFAULT_MASS: f64 = 9.0;
pub const FRONT_WING_AREA: f64 = 0.2;
pub const REAR_WING_AREA: f64 = 0.135;
pub const FRONT_WINGSPAN: f64 = 1.67;
pub const MEAN_CHORD: f64 = 0.21;
pub const BODY_LENGTH: f64 = 1.005;

#[derive(Debug, Clone, PartialEq)]
pub struct AircraftConfig {
    pub mass: f64,
    pub inertia: InertiaTensor,
    /// Reference area, front and rear wing summed, m^2.
    pub wing_area: f64,
    pub mean_chord: f64,
    pub wingspan: f64,
    pub aero: AeroTables,
    pub thrust: ThrustTable,
}

impl Default for AircraftConfig {
    /// 9 kg takeoff weight tandem-wing airframe.
    fn default() -> Self {
        AircraftConfig {
            mass: DEFAULT_MASS,
            inertia: InertiaTensor::from_geometry(DEFAULT_MASS, FRONT_WINGSPAN, BODY_LENGTH)
                .expect("default inertia is physical"),
            wing_area: FRONT_WING_AREA + REAR_WING_AREA,
            mean_chord: MEAN_CHORD,
            wingspan: FRONT_WINGSPAN,
            aero: AeroTables::default_tandem_wing(),
            thrust: ThrustTable::default_electric_pusher(),
        }
    }
}

/// Scenario-file overrides for the airframe; anything omitted keeps the
/// default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftOverrides {
    pub mass_kg: Option<f64>,
    pub inertia_kgm2: Option<[f64; 3]>,
    pub wing_area_m2: Option<f64>,
    pub mean_chord_m: Option<f64>,
    pub wingspan_m: Option<f64>,
    pub aero_tables: Option<String>,
    pub thrust_table: Option<String>,
}

impl AircraftConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("wing_area", self.wing_area),
            ("mean_chord", self.mean_chord),
            ("wingspan", self.wingspan),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Applies overrides; table paths are resolved relative to `base_dir`.
    pub fn with_overrides(o: &AircraftOverrides, base_dir: &Path) -> Result<Self> {
        let mut cfg = AircraftConfig::default();
        if let Some(m) = o.mass_kg {
            cfg.mass = m;
            if o.inertia_kgm2.is_none() {
                cfg.inertia = InertiaTensor::from_geometry(m, FRONT_WINGSPAN, BODY_LENGTH)?;
            }
        }
        if let Some([ixx, iyy, izz]) = o.inertia_kgm2 {
            cfg.inertia = InertiaTensor::new(ixx, iyy, izz)?;
        }
        if let Some(s) = o.wing_area_m2 {
            cfg.wing_area = s;
        }
        if let Some(c) = o.mean_chord_m {
            cfg.mean_chord = c;
        }
        if let Some(b) = o.wingspan_m {
            cfg.wingspan = b;
        }
        if let Some(p) = &o.aero_tables {
            cfg.aero = AeroTables::load(&base_dir.join(p))?;
        }
        if let Some(p) = &o.thrust_table {
            cfg.thrust = ThrustTable::load(&base_dir.join(p))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
