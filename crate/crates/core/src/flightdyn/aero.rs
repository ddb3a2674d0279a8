//! Table-driven aerodynamic build-up.
//!
//! Coefficients are assembled from component tables:
//!
//! ```text
//! CL = CL(a) + CL_q(a) q^ + CL_de(a) de
//! CD = CD(a, b)
//! CY = CY_beta(a) b + CY_dr(a) dr
//! Cl = Cl_beta(a) b + Cl_p(a) p^ + Cl_r(a) r^ + Cl_da(a) da + Cl_dr(a) dr
//! Cm = Cm(a) + Cm_q(a) q^ + Cm_de(a) de
//! Cn = Cn_beta(a) b + Cn_p(a) p^ + Cn_r(a) r^ + Cn_da(a) da + Cn_dr(a) dr
//! ```
//!
//! Table axes are in degrees; derivatives are per radian of angle or per unit
//! of normalized rate (`p^ = p b / 2V`, `q^ = q c / 2V`, `r^ = r b / 2V`).
//!
//! Sign conventions: positive elevator is trailing-edge down (nose-down
//! moment), positive aileron rolls right, positive rudder yaws nose-right.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;

use super::atmosphere::AirData;
use super::config::AircraftConfig;
use super::RigidBodyState;
use crate::avionics::SurfaceActual;
use crate::error::{Error, Result};
use crate::grid::{parse_tables, write_tables, Axis, Grid};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AeroCoefficients {
    pub lift: f64,
    pub drag: f64,
    pub side: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

/// Non-dimensional body rates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NormalizedRates {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeroTables {
    pub cl: Grid,
    pub cd: Grid,
    pub cy_beta: Grid,
    pub cy_dr: Grid,
    pub cl_q: Grid,
    pub cl_de: Grid,
    pub cm: Grid,
    pub cm_q: Grid,
    pub cm_de: Grid,
    pub c_roll_beta: Grid,
    pub c_roll_p: Grid,
    pub c_roll_r: Grid,
    pub c_roll_da: Grid,
    pub c_roll_dr: Grid,
    pub cn_beta: Grid,
    pub cn_p: Grid,
    pub cn_r: Grid,
    pub cn_da: Grid,
    pub cn_dr: Grid,
}

const ONE_D: [&str; 17] = [
    "CL", "CY_beta", "CY_dr", "CL_q", "CL_de", "Cm", "Cm_q", "Cm_de", "Cl_beta", "Cl_p", "Cl_r",
    "Cl_da", "Cl_dr", "Cn_beta", "Cn_p", "Cn_r", "Cn_da",
];

impl AeroTables {
    pub fn coefficients(
        &self,
        alpha: f64,
        beta: f64,
        surfaces: &SurfaceActual,
        rates: NormalizedRates,
    ) -> AeroCoefficients {
        let a = [alpha.to_degrees()];
        let ab = [a[0], beta.to_degrees()];
        let de = surfaces.elevator;
        let da = surfaces.aileron;
        let dr = surfaces.rudder;
        AeroCoefficients {
            lift: self.cl.eval(&a) + self.cl_q.eval(&a) * rates.q + self.cl_de.eval(&a) * de,
            drag: self.cd.eval(&ab),
            side: self.cy_beta.eval(&a) * beta + self.cy_dr.eval(&a) * dr,
            roll: self.c_roll_beta.eval(&a) * beta
                + self.c_roll_p.eval(&a) * rates.p
                + self.c_roll_r.eval(&a) * rates.r
                + self.c_roll_da.eval(&a) * da
                + self.c_roll_dr.eval(&a) * dr,
            pitch: self.cm.eval(&a) + self.cm_q.eval(&a) * rates.q + self.cm_de.eval(&a) * de,
            yaw: self.cn_beta.eval(&a) * beta
                + self.cn_p.eval(&a) * rates.p
                + self.cn_r.eval(&a) * rates.r
                + self.cn_da.eval(&a) * da
                + self.cn_dr.eval(&a) * dr,
        }
    }

    /// Angle-of-attack range covered by the lift table, rad.
    pub fn alpha_range(&self) -> (f64, f64) {
        let ax = &self.cl.axes()[0];
        (ax.min().to_radians(), ax.max().to_radians())
    }

    fn named(&self) -> Vec<(&'static str, &Grid)> {
        vec![
            ("CL", &self.cl),
            ("CD", &self.cd),
            ("CY_beta", &self.cy_beta),
            ("CY_dr", &self.cy_dr),
            ("CL_q", &self.cl_q),
            ("CL_de", &self.cl_de),
            ("Cm", &self.cm),
            ("Cm_q", &self.cm_q),
            ("Cm_de", &self.cm_de),
            ("Cl_beta", &self.c_roll_beta),
            ("Cl_p", &self.c_roll_p),
            ("Cl_r", &self.c_roll_r),
            ("Cl_da", &self.c_roll_da),
            ("Cl_dr", &self.c_roll_dr),
            ("Cn_beta", &self.cn_beta),
            ("Cn_p", &self.cn_p),
            ("Cn_r", &self.cn_r),
            ("Cn_da", &self.cn_da),
            ("Cn_dr", &self.cn_dr),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(
            "# aerodynamic coefficient tables; angles in degrees, derivatives per rad\n\n",
        );
        out.push_str(&write_tables(self.named()));
        out
    }

    pub fn from_text(text: &str, source_name: &str) -> Result<Self> {
        let mut tables = parse_tables(text, source_name)?;
        let mut take = |name: &str, dims: usize| -> Result<Grid> {
            let g = tables.remove(name).ok_or_else(|| Error::Parse {
                source_name: source_name.to_string(),
                line: 0,
                message: format!("missing table `{name}`"),
            })?;
            if g.dims() != dims {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: 0,
                    message: format!("table `{name}` must have {dims} axes, has {}", g.dims()),
                });
            }
            Ok(g)
        };
        let cd = take("CD", 2)?;
        let mut one: BTreeMap<&str, Grid> = BTreeMap::new();
        for name in ONE_D.iter().chain(["Cn_dr"].iter()) {
            one.insert(name, take(name, 1)?);
        }
        let mut get = |n: &str| one.remove(n).expect("checked above");
        Ok(AeroTables {
            cl: get("CL"),
            cd,
            cy_beta: get("CY_beta"),
            cy_dr: get("CY_dr"),
            cl_q: get("CL_q"),
            cl_de: get("CL_de"),
            cm: get("Cm"),
            cm_q: get("Cm_q"),
            cm_de: get("Cm_de"),
            c_roll_beta: get("Cl_beta"),
            c_roll_p: get("Cl_p"),
            c_roll_r: get("Cl_r"),
            c_roll_da: get("Cl_da"),
            c_roll_dr: get("Cl_dr"),
            cn_beta: get("Cn_beta"),
            cn_p: get("Cn_p"),
            cn_r: get("Cn_r"),
            cn_da: get("Cn_da"),
            cn_dr: get("Cn_dr"),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }

    /// Default coefficient set for a ~9 kg tandem-wing tube-launched UAV.
    ///
    /// Linear lift up to a 14 deg stall followed by a gentle post-stall
    /// break, parabolic drag polar with a sideslip penalty, statically stable
    /// in pitch and yaw, weak dihedral (mildly divergent spiral mode, as is
    /// usual for small airframes with little wing dihedral).
    pub fn default_tandem_wing() -> Self {
        const CL0: f64 = 0.20;
        const CL_ALPHA: f64 = 5.0;
        const STALL_DEG: f64 = 14.0;
        const NEG_STALL_DEG: f64 = -12.0;
        const CD0: f64 = 0.025;
        const INDUCED: f64 = 0.035;
        const CD_BETA: f64 = 0.30;
        const CM0: f64 = -0.03;
        const CM_ALPHA: f64 = -0.8;

        let alpha_axis = || {
            Axis::new("alpha_deg", (-10..=15).map(|i| f64::from(i) * 2.0).collect())
                .expect("valid axis")
        };
        let beta_axis = Axis::new("beta_deg", (-6..=6).map(|i| f64::from(i) * 5.0).collect())
            .expect("valid axis");

        let lift = |a_deg: f64| -> f64 {
            let linear = |d: f64| CL0 + CL_ALPHA * d.to_radians();
            if a_deg > STALL_DEG {
                linear(STALL_DEG) - 0.03 * (a_deg - STALL_DEG)
            } else if a_deg < NEG_STALL_DEG {
                linear(NEG_STALL_DEG) + 0.03 * (NEG_STALL_DEG - a_deg)
            } else {
                linear(a_deg)
            }
        };
        let constant = |v: f64| Grid::sample(vec![alpha_axis()], |_| v).expect("valid grid");

        AeroTables {
            cl: Grid::sample(vec![alpha_axis()], |p| lift(p[0])).expect("valid grid"),
            cd: Grid::sample(vec![alpha_axis(), beta_axis], |p| {
                let cl = lift(p[0]);
                let stall = (p[0].abs() - STALL_DEG).max(0.0) * 0.015;
                CD0 + INDUCED * cl * cl + stall + CD_BETA * p[1].to_radians().powi(2)
            })
            .expect("valid grid"),
            cy_beta: constant(-0.40),
            cy_dr: constant(-0.10),
            cl_q: constant(6.0),
            cl_de: constant(0.40),
            cm: Grid::sample(vec![alpha_axis()], |p| CM0 + CM_ALPHA * p[0].to_radians())
                .expect("valid grid"),
            cm_q: constant(-12.0),
            cm_de: constant(-1.0),
            c_roll_beta: constant(-0.015),
            c_roll_p: constant(-0.45),
            c_roll_r: constant(0.15),
            c_roll_da: constant(0.20),
            c_roll_dr: constant(-0.005),
            cn_beta: constant(0.06),
            cn_p: constant(-0.03),
            cn_r: constant(-0.08),
            cn_da: constant(-0.01),
            cn_dr: constant(0.06),
        }
    }
}

/// Aerodynamic force and moment in body axes.
pub fn aero_force_moment(
    state: &RigidBodyState,
    surfaces: &SurfaceActual,
    air: &AirData,
    config: &AircraftConfig,
) -> (Vector3<f64>, Vector3<f64>) {
    let air = air.with_velocity(&state.velocity_body);
    let v = air.airspeed;
    if v <= 0.0 {
        return (Vector3::zeros(), Vector3::zeros());
    }
    let qbar = air.dynamic_pressure();
    let b = config.wingspan;
    let c = config.mean_chord;
    let s = config.wing_area;
    let w = &state.angular_rates;
    let rates = NormalizedRates {
        p: w.x * b / (2.0 * v),
        q: w.y * c / (2.0 * v),
        r: w.z * b / (2.0 * v),
    };
    let coef = config.aero.coefficients(air.alpha, air.beta, surfaces, rates);
    let (sa, ca) = air.alpha.sin_cos();
    let force = Vector3::new(
        -coef.drag * ca + coef.lift * sa,
        coef.side,
        -coef.drag * sa - coef.lift * ca,
    ) * (qbar * s);
    let moment = Vector3::new(coef.roll * b, coef.pitch * c, coef.yaw * b) * (qbar * s);
    (force, moment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flightdyn::standard_atmosphere;
    use nalgebra::UnitQuaternion;

    fn state_with(v: Vector3<f64>) -> RigidBodyState {
        RigidBodyState {
            time: 0.0,
            position: Vector3::new(0.0, 0.0, -100.0),
            velocity_body: v,
            attitude: UnitQuaternion::from_euler_angles(0.3, -0.2, 1.0),
            angular_rates: Vector3::zeros(),
        }
    }

    #[test]
    fn zero_airspeed_gives_zero_loads() {
        let cfg = AircraftConfig::default();
        let air = standard_atmosphere(100.0).unwrap();
        let (f, m) = aero_force_moment(
            &state_with(Vector3::zeros()),
            &SurfaceActual::default(),
            &air,
            &cfg,
        );
        assert_eq!(f, Vector3::zeros());
        assert_eq!(m, Vector3::zeros());
    }

    #[test]
    fn force_scales_with_square_of_airspeed() {
        let cfg = AircraftConfig::default();
        let air = standard_atmosphere(100.0).unwrap();
        let dir = Vector3::new(0.06f64.cos(), 0.01, 0.06f64.sin()).normalize();
        let s = SurfaceActual {
            elevator: -0.05,
            aileron: 0.02,
            rudder: 0.01,
            throttle: 0.0,
        };
        let (f1, m1) = aero_force_moment(&state_with(dir * 20.0), &s, &air, &cfg);
        let (f2, m2) = aero_force_moment(&state_with(dir * 40.0), &s, &air, &cfg);
        assert!((f2 - f1 * 4.0).norm() < 1e-9 * f2.norm());
        assert!((m2 - m1 * 4.0).norm() < 1e-9 * m2.norm().max(1.0));
    }

    #[test]
    fn node_lookup_is_exact() {
        let tables = AeroTables::default_tandem_wing();
        let c = tables.coefficients(
            2f64.to_radians(),
            0.0,
            &SurfaceActual::default(),
            NormalizedRates::default(),
        );
        // alpha axis starts at -20 deg with 2 deg spacing; 2 deg is node 11
        let idx = 11;
        assert_eq!(tables.cl.axes()[0].breakpoints[idx], 2.0);
        assert_eq!(c.lift, tables.cl.node(&[idx]));
        assert_eq!(c.pitch, tables.cm.node(&[idx]));
        // beta = 0 is node 6 of the drag table
        assert_eq!(c.drag, tables.cd.node(&[idx, 6]));
        assert_eq!(c.side, 0.0);
        assert_eq!(c.roll, 0.0);
        assert_eq!(c.yaw, 0.0);
    }

    #[test]
    fn text_round_trip_preserves_tables() {
        let t = AeroTables::default_tandem_wing();
        let back = AeroTables::from_text(&t.to_text(), "mem").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn missing_table_is_reported() {
        let t = AeroTables::default_tandem_wing().to_text();
        let cut = t.replace("table Cn_dr", "table Unused");
        assert!(AeroTables::from_text(&cut, "mem").is_err());
    }
}
