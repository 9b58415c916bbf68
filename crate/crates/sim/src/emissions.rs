//! Speed/acceleration-dependent per-vehicle emission rates and interval totals.

use serde::Serialize;

use crate::scenario::{EmissionCoeffs, RateCoeffs};

/// Pollutant totals in kilograms, additive across disjoint intervals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EmissionTotals {
    pub co: f64,
    pub hc: f64,
    pub nox: f64,
    pub pmx: f64,
}

impl EmissionTotals {
    pub fn add(&mut self, other: &EmissionTotals) {
        self.co += other.co;
        self.hc += other.hc;
        self.nox += other.nox;
        self.pmx += other.pmx;
    }

    pub fn is_zero(&self) -> bool {
        self.co == 0.0 && self.hc == 0.0 && self.nox == 0.0 && self.pmx == 0.0
    }
}

/// Instantaneous emission rate in grams/second.
pub fn rate_g_per_s(coeffs: &RateCoeffs, speed: f64, accel: f64) -> f64 {
    let a_pos = accel.max(0.0);
    let r = coeffs[0]
        + coeffs[1] * speed
        + coeffs[2] * speed * speed
        + coeffs[3] * speed * speed * speed
        + coeffs[4] * speed * a_pos;
    r.max(0.0)
}

/// One vehicle's contribution over a step of `dt` seconds, in kilograms.
pub fn step_emissions(coeffs: &EmissionCoeffs, speed: f64, accel: f64, dt: f64) -> EmissionTotals {
    let s = dt / 1000.0;
    EmissionTotals {
        co: rate_g_per_s(&coeffs.co, speed, accel) * s,
        hc: rate_g_per_s(&coeffs.hc, speed, accel) * s,
        nox: rate_g_per_s(&coeffs.nox, speed, accel) * s,
        pmx: rate_g_per_s(&coeffs.pmx, speed, accel) * s,
    }
}
