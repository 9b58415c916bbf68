//! Scenario configuration: network geometry, vehicle classes, demand,
//! driving-model parameters, detectors and emission coefficients.
//!
//! Scenarios round-trip through TOML so experiments are reproducible from a
//! single human-readable file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Route, SimError, VehicleClass};

pub const HOURS_PER_PROFILE: usize = 18;
pub const MAIN_LANES: usize = 5;

/// Geometry of the modeled freeway stretch. The mainline coordinate runs
/// upstream -> controlled section -> merge area -> downstream; the on-ramp
/// gore sits at the start of the merge area and the off-ramp diverge at its
/// end.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkLayout {
    pub upstream_length: f64,
    pub controlled_length: f64,
    pub merge_length: f64,
    pub downstream_length: f64,
    pub ramp_length: f64,
    pub n_main_lanes: usize,
    pub ramp_lanes: usize,
    /// m/s, applies outside the controlled section (65 mph).
    pub default_main_limit: f64,
    /// m/s, applies on the on-ramp (50 mph).
    pub default_ramp_limit: f64,
    /// Allowed overspeed above the active limit. 0 models full compliance.
    pub compliance_tolerance: f64,
}

impl Default for NetworkLayout {
    fn default() -> Self {
        NetworkLayout {
            upstream_length: 500.0,
            controlled_length: 780.35,
            merge_length: 26.87,
            downstream_length: 300.0,
            ramp_length: 200.0,
            n_main_lanes: MAIN_LANES,
            ramp_lanes: 1,
            default_main_limit: 29.185,
            default_ramp_limit: 22.45,
            compliance_tolerance: 0.0,
        }
    }
}

impl NetworkLayout {
    pub fn controlled_start(&self) -> f64 {
        self.upstream_length
    }

    pub fn controlled_end(&self) -> f64 {
        self.upstream_length + self.controlled_length
    }

    /// On-ramp gore: where the acceleration lane begins.
    pub fn merge_start(&self) -> f64 {
        self.controlled_end()
    }

    /// Off-ramp diverge and end of the acceleration lane.
    pub fn merge_end(&self) -> f64 {
        self.merge_start() + self.merge_length
    }

    pub fn main_end(&self) -> f64 {
        self.merge_end() + self.downstream_length
    }

    /// Ramp-frame coordinate of the end of the acceleration lane.
    pub fn ramp_end(&self) -> f64 {
        self.ramp_length + self.merge_length
    }

    pub fn rightmost_lane(&self) -> usize {
        self.n_main_lanes - 1
    }
}

/// Physical and behavioral parameters of one vehicle class.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub length: f64,
    pub max_accel: f64,
    pub comfortable_decel: f64,
    /// Desired speed as a fraction of the active limit, capped at 1 under
    /// full compliance.
    pub desired_speed_factor: f64,
    /// Physical braking bound, m/s^2 (positive).
    pub max_brake: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VehicleClasses {
    pub passenger: VehicleSpec,
    pub truck: VehicleSpec,
}

impl Default for VehicleClasses {
    fn default() -> Self {
        VehicleClasses {
            passenger: VehicleSpec {
                length: 3.5,
                max_accel: 2.6,
                comfortable_decel: 2.0,
                desired_speed_factor: 1.0,
                max_brake: 9.0,
            },
            truck: VehicleSpec {
                length: 8.0,
                max_accel: 1.3,
                comfortable_decel: 1.5,
                desired_speed_factor: 0.9,
                max_brake: 7.5,
            },
        }
    }
}

impl VehicleClasses {
    pub fn spec(&self, class: VehicleClass) -> &VehicleSpec {
        match class {
            VehicleClass::Passenger => &self.passenger,
            VehicleClass::Truck => &self.truck,
        }
    }
}

/// Car-following and lane-changing parameters shared by all classes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DrivingModel {
    /// Desired time headway, s.
    pub headway_time: f64,
    /// Standstill jam gap, m.
    pub jam_gap: f64,
    /// MOBIL politeness factor.
    pub politeness: f64,
    /// Incentive threshold for a discretionary change, m/s^2.
    pub lc_threshold: f64,
    /// Max braking imposed on the new follower by a discretionary change.
    pub safe_decel: f64,
    /// Max braking imposed on the lane-4 follower by an on-ramp merge or a
    /// desperate mandatory change.
    pub merge_decel: f64,
    /// Seconds between lane changes of one vehicle.
    pub lc_cooldown: f64,
    /// Off-ramp vehicles start forcing right changes this far before the diverge.
    pub mandatory_zone: f64,
    /// Off-ramp vehicles in the wrong lane treat the diverge as a stop line
    /// inside this distance.
    pub stopline_zone: f64,
    /// How far ahead vehicles anticipate static speed-limit drops, m.
    pub limit_lookahead: f64,
    /// Clear space required at the network entry before a queued vehicle
    /// is released, m.
    pub min_entry_gap: f64,
}

impl Default for DrivingModel {
    fn default() -> Self {
        DrivingModel {
            headway_time: 1.2,
            jam_gap: 2.0,
            politeness: 0.3,
            lc_threshold: 0.2,
            safe_decel: 2.0,
            merge_decel: 4.0,
            lc_cooldown: 5.0,
            mandatory_zone: 900.0,
            stopline_zone: 150.0,
            limit_lookahead: 200.0,
            min_entry_gap: 15.0,
        }
    }
}

/// Hourly Poisson arrival rates per route plus the vehicle-class mix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DemandProfile {
    pub main_main: Vec<f64>,
    pub main_off: Vec<f64>,
    pub on_main: Vec<f64>,
    pub truck_fraction: f64,
    pub seed: u64,
}

impl DemandProfile {
    pub fn rates(&self, route: Route) -> &[f64] {
        match route {
            Route::MainMain => &self.main_main,
            Route::MainOff => &self.main_off,
            Route::OnMain => &self.on_main,
        }
    }
}

impl Default for DemandProfile {
    fn default() -> Self {
        // Shaped to produce a recurrent merge bottleneck in hours 2-5.
        DemandProfile {
            main_main: vec![
                3000.0, 3600.0, 4600.0, 4800.0, 4800.0, 4400.0, 3600.0, 3200.0, 3000.0, 3000.0,
                3200.0, 3600.0, 4000.0, 3600.0, 3200.0, 2800.0, 2400.0, 2000.0,
            ],
            main_off: vec![
                500.0, 600.0, 750.0, 800.0, 800.0, 700.0, 600.0, 550.0, 500.0, 500.0, 550.0,
                600.0, 650.0, 600.0, 550.0, 500.0, 450.0, 400.0,
            ],
            on_main: vec![
                600.0, 800.0, 900.0, 950.0, 950.0, 850.0, 700.0, 600.0, 550.0, 550.0, 600.0,
                650.0, 700.0, 650.0, 600.0, 550.0, 500.0, 450.0,
            ],
            truck_fraction: 0.15,
            seed: 1,
        }
    }
}

/// Coefficients of the per-vehicle emission rate polynomial, grams/second:
/// rate = max(0, c0 + c1 v + c2 v^2 + c3 v^3 + c4 v a+) with v in m/s and
/// a+ the positive part of the acceleration.
pub type RateCoeffs = [f64; 5];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EmissionCoeffs {
    pub co: RateCoeffs,
    pub hc: RateCoeffs,
    pub nox: RateCoeffs,
    pub pmx: RateCoeffs,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EmissionModel {
    pub passenger: EmissionCoeffs,
    pub truck: EmissionCoeffs,
}

impl Default for EmissionModel {
    fn default() -> Self {
        EmissionModel {
            passenger: EmissionCoeffs {
                co: [0.05, 3.0e-3, 1.0e-4, 2.0e-6, 2.0e-2],
                hc: [3.0e-3, 2.0e-4, 6.0e-6, 1.2e-7, 1.0e-3],
                nox: [6.0e-3, 4.0e-4, 1.5e-5, 3.0e-7, 2.5e-3],
                pmx: [3.0e-4, 2.0e-5, 8.0e-7, 1.6e-8, 1.2e-4],
            },
            truck: EmissionCoeffs {
                co: [0.15, 9.0e-3, 3.0e-4, 6.0e-6, 6.0e-2],
                hc: [9.0e-3, 6.0e-4, 1.8e-5, 3.6e-7, 3.0e-3],
                nox: [2.4e-2, 1.6e-3, 6.0e-5, 1.2e-6, 1.0e-2],
                pmx: [1.2e-3, 8.0e-5, 3.2e-6, 6.4e-8, 4.8e-4],
            },
        }
    }
}

impl EmissionModel {
    pub fn coeffs(&self, class: VehicleClass) -> &EmissionCoeffs {
        match class {
            VehicleClass::Passenger => &self.passenger,
            VehicleClass::Truck => &self.truck,
        }
    }
}

/// Detector placement, as offsets from section boundaries.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectorLayout {
    /// Upstream station distance before the controlled-section start.
    pub upstream_setback: f64,
    /// Merge station distance after the merge-area start.
    pub merge_offset: f64,
    /// Ramp detector distance before the gore.
    pub ramp_setback: f64,
}

impl Default for DetectorLayout {
    fn default() -> Self {
        DetectorLayout { upstream_setback: 10.0, merge_offset: 13.0, ramp_setback: 5.0 }
    }
}

/// Simulation stepping and episode shape.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    /// Simulation step, s.
    pub dt: f64,
    /// Simulation steps per control interval (limits change every minute).
    pub steps_per_interval: usize,
    /// Control intervals per episode: 1080 for the 18 h scenario.
    pub episode_intervals: usize,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig { dt: 1.0, steps_per_interval: 60, episode_intervals: 1080 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub network: NetworkLayout,
    #[serde(default)]
    pub vehicles: VehicleClasses,
    #[serde(default)]
    pub driving: DrivingModel,
    #[serde(default)]
    pub demand: DemandProfile,
    #[serde(default)]
    pub emissions: EmissionModel,
    #[serde(default)]
    pub detectors: DetectorLayout,
    #[serde(default)]
    pub control: ControlConfig,
}

impl Scenario {
    /// Full-scale scenario: 18-hour episodes, 1080 control intervals.
    pub fn paper() -> Self {
        Scenario::default()
    }

    /// Desk-scale scenario: 2-hour episodes with a congested first hour and a
    /// recovery hour, sized so training runs finish on a laptop.
    pub fn desk() -> Self {
        let mut s = Scenario::default();
        s.control.episode_intervals = 120;
        s.demand.main_main = pad_hours(&[4600.0, 2200.0]);
        s.demand.main_off = pad_hours(&[800.0, 350.0]);
        s.demand.on_main = pad_hours(&[900.0, 350.0]);
        s
    }

    pub fn episode_steps(&self) -> usize {
        self.control.steps_per_interval * self.control.episode_intervals
    }

    pub fn episode_seconds(&self) -> f64 {
        self.episode_steps() as f64 * self.control.dt
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Scenario::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = &self.network;
        for (name, v) in [
            ("upstream_length", n.upstream_length),
            ("controlled_length", n.controlled_length),
            ("merge_length", n.merge_length),
            ("downstream_length", n.downstream_length),
            ("ramp_length", n.ramp_length),
            ("default_main_limit", n.default_main_limit),
            ("default_ramp_limit", n.default_ramp_limit),
        ] {
            if !(v > 0.0) {
                return Err(SimError::Config(format!("network.{name} must be > 0, got {v}")));
            }
        }
        if n.compliance_tolerance < 0.0 {
            return Err(SimError::Config("network.compliance_tolerance must be >= 0".into()));
        }
        if n.n_main_lanes != MAIN_LANES || n.ramp_lanes != 1 {
            return Err(SimError::Config(format!(
                "reference scenario requires {MAIN_LANES} main lanes and 1 ramp lane"
            )));
        }
        for class in [&self.vehicles.passenger, &self.vehicles.truck] {
            if !(class.length > 0.0 && class.max_accel > 0.0 && class.comfortable_decel > 0.0) {
                return Err(SimError::Config(
                    "vehicle length, max_accel and comfortable_decel must be > 0".into(),
                ));
            }
            if !(class.max_brake > 0.0) {
                return Err(SimError::Config("vehicle max_brake must be > 0".into()));
            }
        }
        let d = &self.demand;
        if !(0.0..=1.0).contains(&d.truck_fraction) {
            return Err(SimError::Config(format!(
                "demand.truck_fraction must be in [0, 1], got {}",
                d.truck_fraction
            )));
        }
        for route in Route::ALL {
            let rates = d.rates(route);
            if rates.len() != HOURS_PER_PROFILE {
                return Err(SimError::Config(format!(
                    "demand profile for {route:?} must have {HOURS_PER_PROFILE} hourly entries, got {}",
                    rates.len()
                )));
            }
            if let Some(bad) = rates.iter().find(|r| !(**r >= 0.0)) {
                return Err(SimError::Config(format!(
                    "demand rates must be >= 0, got {bad} for {route:?}"
                )));
            }
        }
        let c = &self.control;
        if !(c.dt > 0.0) {
            return Err(SimError::Config("control.dt must be > 0".into()));
        }
        if c.steps_per_interval == 0 || c.episode_intervals == 0 {
            return Err(SimError::Config("control interval and episode length must be > 0".into()));
        }
        let episode_h = self.episode_seconds() / 3600.0;
        if episode_h > HOURS_PER_PROFILE as f64 + 1e-9 {
            return Err(SimError::Config(format!(
                "episode spans {episode_h:.2} h but the demand profile covers {HOURS_PER_PROFILE} h"
            )));
        }
        Ok(())
    }
}

fn pad_hours(prefix: &[f64]) -> Vec<f64> {
    let mut v = prefix.to_vec();
    v.resize(HOURS_PER_PROFILE, 0.0);
    v
}
