//! Emergency-braking surveillance: counts distinct vehicles whose
//! deceleration exceeded the threshold within the current interval.

use std::collections::HashSet;

use crate::VehicleId;

pub const EMERGENCY_DECEL_THRESHOLD: f64 = 4.5;

#[derive(Debug, Clone)]
pub struct BrakeMonitor {
    threshold: f64,
    tripped: HashSet<VehicleId>,
}

impl BrakeMonitor {
    pub fn new(threshold: f64) -> Self {
        BrakeMonitor { threshold, tripped: HashSet::new() }
    }

    /// Records one vehicle-step. An event requires deceleration strictly
    /// above the threshold.
    pub fn record(&mut self, id: VehicleId, accel: f64) {
        if -accel > self.threshold {
            self.tripped.insert(id);
        }
    }

    /// Vehicles tripped so far this interval; each counted at most once.
    pub fn count(&self) -> u32 {
        self.tripped.len() as u32
    }

    /// Returns the interval count and starts a fresh interval.
    pub fn take_count(&mut self) -> u32 {
        let n = self.count();
        self.tripped.clear();
        n
    }
}

impl Default for BrakeMonitor {
    fn default() -> Self {
        BrakeMonitor::new(EMERGENCY_DECEL_THRESHOLD)
    }
}
