//! Point detectors: occupancy, crossing speeds and flow counts, aggregated
//! over a control interval.
//!
//! Occupancy is the fraction of the interval during which the detector point
//! was covered by a vehicle body, computed kinematically from each step's
//! linear motion.

/// One per-lane point detector.
#[derive(Debug, Clone)]
pub struct PointDetector {
    pub position: f64,
    covered_time: f64,
    speed_samples: Vec<f64>,
    crossings: u32,
}

impl PointDetector {
    pub fn new(position: f64) -> Self {
        PointDetector { position, covered_time: 0.0, speed_samples: Vec::new(), crossings: 0 }
    }

    /// Records one vehicle's step: front moved `from -> to` at constant
    /// speed over `dt` seconds; the body covers `[front - length, front]`.
    pub fn record_step(&mut self, from: f64, to: f64, length: f64, speed: f64, dt: f64) {
        let d = self.position;
        if speed > 0.0 {
            let t_in = ((d - from) / speed).clamp(0.0, dt);
            let t_out = (((d + length) - from) / speed).clamp(0.0, dt);
            if t_out > t_in {
                self.covered_time += t_out - t_in;
            }
            if from < d && to >= d {
                self.crossings += 1;
                self.speed_samples.push(speed);
            }
        } else {
            // Stationary: covered the whole step iff the body sits on the point.
            if from >= d && from - length <= d {
                self.covered_time += dt;
            }
        }
    }

    /// Aggregates and resets. `interval` is the aggregation window in
    /// seconds; `fallback_speed` is reported when nothing crossed.
    pub fn read(&mut self, interval: f64, fallback_speed: f64) -> LaneReading {
        let occupancy = (self.covered_time / interval).clamp(0.0, 1.0);
        let mean_speed = if self.speed_samples.is_empty() {
            fallback_speed
        } else {
            self.speed_samples.iter().sum::<f64>() / self.speed_samples.len() as f64
        };
        let flow = self.crossings;
        self.covered_time = 0.0;
        self.speed_samples.clear();
        self.crossings = 0;
        LaneReading { occupancy, mean_speed, flow }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneReading {
    pub occupancy: f64,
    pub mean_speed: f64,
    pub flow: u32,
}

/// Readings of one detector station (one entry per lane).
#[derive(Debug, Clone, PartialEq)]
pub struct StationReading {
    pub occupancy: Vec<f64>,
    pub mean_speed: Vec<f64>,
    pub flow: Vec<u32>,
}

/// Detector stations the agent observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Station {
    Upstream,
    Merge,
    Ramp,
}
