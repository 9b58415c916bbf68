//! Intelligent-driver-model car following.
//!
//! Acceleration is the free-road term minus an interaction term built from
//! the desired dynamic gap; the result is clamped to the vehicle's physical
//! braking bound.

use crate::scenario::{DrivingModel, VehicleSpec};

/// Free-road acceleration toward desired speed `v0`.
pub fn free_accel(spec: &VehicleSpec, speed: f64, v0: f64) -> f64 {
    if v0 <= 0.0 {
        return if speed > 0.0 { -spec.max_brake } else { 0.0 };
    }
    let a = spec.max_accel * (1.0 - (speed / v0).powi(4));
    a.max(-spec.max_brake)
}

/// Car-following acceleration with a leader `gap` meters ahead (bumper to
/// bumper) moving at `lead_speed`. A non-positive gap resolves to maximum
/// braking, never to overlap.
pub fn follow_accel(
    spec: &VehicleSpec,
    driving: &DrivingModel,
    speed: f64,
    v0: f64,
    gap: f64,
    lead_speed: f64,
) -> f64 {
    if gap <= 0.0 {
        return -spec.max_brake;
    }
    let closing = speed - lead_speed;
    let dynamic = speed * driving.headway_time
        + speed * closing / (2.0 * (spec.max_accel * spec.comfortable_decel).sqrt());
    let desired_gap = driving.jam_gap + dynamic.max(0.0);
    let free = if v0 > 0.0 { 1.0 - (speed / v0).powi(4) } else { -1.0 };
    let a = spec.max_accel * (free - (desired_gap / gap).powi(2));
    a.max(-spec.max_brake)
}

/// Deceleration needed to be at `target_speed` after `distance` meters;
/// used to anticipate lower speed limits ahead. Returns `None` when no
/// braking is required.
pub fn anticipation_accel(speed: f64, target_speed: f64, distance: f64) -> Option<f64> {
    if target_speed >= speed {
        return None;
    }
    if distance <= 0.0 {
        return Some(f64::NEG_INFINITY);
    }
    Some((target_speed * target_speed - speed * speed) / (2.0 * distance))
}

/// Smooth braking toward a standstill point `gap` meters ahead (a stop line
/// or the end of an acceleration lane): constant kinematic deceleration to
/// rest one jam gap before it, with a hard hold once inside that margin.
pub fn stop_point_accel(spec: &VehicleSpec, driving: &DrivingModel, speed: f64, gap: f64) -> f64 {
    let usable = gap - driving.jam_gap;
    if usable <= 0.1 {
        return if speed > 0.0 { -spec.max_brake } else { 0.0 };
    }
    (-speed * speed / (2.0 * usable)).max(-spec.max_brake)
}
