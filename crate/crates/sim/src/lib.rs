//! Deterministic, seeded lane-level microsimulation of a 5-lane freeway with
//! an on-ramp/off-ramp merge bottleneck.
//!
//! Vehicles follow an intelligent-driver car-following law under per-lane
//! speed limits, change lanes by an incentive/safety rule, and merge from the
//! ramp by gap acceptance. Loop detectors, emission accounting, braking
//! surveillance and exact travel-time bookkeeping feed the control layer.

mod braking;
mod demand;
mod detector;
mod emissions;
mod error;
mod idm;
mod lane_change;
mod metrics;
mod scenario;
mod vehicle;
mod world;

pub use braking::{BrakeMonitor, EMERGENCY_DECEL_THRESHOLD};
pub use demand::{generate_demand, generate_demand_seeded, schedule_checksum, Arrival};
pub use detector::{LaneReading, PointDetector, Station, StationReading};
pub use emissions::{rate_g_per_s, step_emissions, EmissionTotals};
pub use error::SimError;
pub use idm::{anticipation_accel, follow_accel, free_accel};
pub use metrics::{metrics_csv_header, metrics_csv_row};
pub use scenario::{
    ControlConfig, DemandProfile, DetectorLayout, DrivingModel, EmissionCoeffs, EmissionModel,
    NetworkLayout, RateCoeffs, Scenario, VehicleClasses, VehicleSpec, HOURS_PER_PROFILE,
    MAIN_LANES,
};
pub use vehicle::{Route, Vehicle, VehicleClass, VehicleId};
pub use world::{IntervalMetrics, LanePlace, StepSummary, World};
