use std::path::Path;

use nalgebra::Vector3;

use super::atmosphere::standard_atmosphere;
use super::config::AircraftConfig;
use crate::error::{Error, Result};
use crate::grid::{parse_tables, write_tables, Axis, Grid};

/// Thrust in newtons tabulated over (throttle, airspeed m/s, altitude m).
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustTable {
    grid: Grid,
}

impl ThrustTable {
    pub fn new(grid: Grid) -> Result<Self> {
        if grid.dims() != 3 {
            return Err(Error::Config(
                "thrust table needs axes (throttle, airspeed, altitude)".into(),
            ));
        }
        let throttle = &grid.axes()[0];
        if throttle.min() != 0.0 || throttle.max() != 1.0 {
            return Err(Error::Config("thrust throttle axis must span [0, 1]".into()));
        }
        let (nv, nh) = (grid.axes()[1].len(), grid.axes()[2].len());
        for iv in 0..nv {
            for ih in 0..nh {
                if grid.node(&[0, iv, ih]) != 0.0 {
                    return Err(Error::Config("thrust at zero throttle must be 0".into()));
                }
                for it in 1..throttle.len() {
                    let (lo, hi) = (grid.node(&[it - 1, iv, ih]), grid.node(&[it, iv, ih]));
                    if hi < lo || hi < 0.0 {
                        return Err(Error::Config(
                            "thrust must be non-negative and non-decreasing in throttle".into(),
                        ));
                    }
                }
            }
        }
        Ok(ThrustTable { grid })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_airspeed(&self) -> f64 {
        self.grid.axes()[1].max()
    }

    pub fn eval(&self, throttle: f64, airspeed: f64, altitude: f64) -> f64 {
        self.grid.eval(&[throttle, airspeed, altitude])
    }

    pub fn to_text(&self) -> String {
        format!(
            "# thrust in N over throttle [0,1], airspeed m/s, altitude m\n\n{}",
            write_tables([("thrust", &self.grid)])
        )
    }

    pub fn from_text(text: &str, source_name: &str) -> Result<Self> {
        let mut tables = parse_tables(text, source_name)?;
        let grid = tables.remove("thrust").ok_or_else(|| Error::Parse {
            source_name: source_name.to_string(),
            line: 0,
            message: "missing table `thrust`".into(),
        })?;
        ThrustTable::new(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }

    /// Electric pusher propeller: 45 N static thrust, linear fall-off to zero
    /// at 85 m/s, scaled by density ratio.
    pub fn default_electric_pusher() -> Self {
        const STATIC_THRUST: f64 = 45.0;
        const ZERO_THRUST_SPEED: f64 = 85.0;
        let rho0 = standard_atmosphere(0.0).expect("sea level").density;
        let axes = vec![
            Axis::new("throttle", vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).expect("axis"),
            Axis::new(
                "airspeed_mps",
                vec![0.0, 10.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 60.0, 70.0, 85.0],
            )
            .expect("axis"),
            Axis::new("altitude_m", vec![0.0, 500.0, 1000.0, 2000.0, 4000.0]).expect("axis"),
        ];
        let grid = Grid::sample(axes, |p| {
            let sigma = standard_atmosphere(p[2]).expect("in range").density / rho0;
            STATIC_THRUST * p[0].powf(1.3) * (1.0 - p[1] / ZERO_THRUST_SPEED).max(0.0) * sigma
        })
        .expect("grid");
        ThrustTable::new(grid).expect("valid default table")
    }
}

/// Thrust vector along body x.
pub fn propulsion_thrust(
    throttle: f64,
    airspeed: f64,
    altitude: f64,
    config: &AircraftConfig,
) -> Result<Vector3<f64>> {
    if !(0.0..=1.0).contains(&throttle) {
        return Err(Error::Command(format!("throttle {throttle} outside [0, 1]")));
    }
    Ok(Vector3::new(
        config.thrust.eval(throttle, airspeed, altitude).max(0.0),
        0.0,
        0.0,
    ))
}
