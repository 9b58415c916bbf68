//! Lane changing: MOBIL-style incentive/safety rule for discretionary moves,
//! urgency-scaled mandatory right changes ahead of the off-ramp, and
//! gap-acceptance merging from the on-ramp acceleration lane.

use crate::idm::{follow_accel, free_accel};
use crate::scenario::MAIN_LANES;
use crate::vehicle::Vehicle;
use crate::world::{limit_at, World};
use crate::Route;

/// Acceleration changes entering the MOBIL incentive.
struct ChangeBalance {
    own_now: f64,
    own_after: f64,
    new_follower_now: f64,
    new_follower_after: f64,
    old_follower_now: f64,
    old_follower_after: f64,
}

impl ChangeBalance {
    fn incentive(&self, politeness: f64) -> f64 {
        (self.own_after - self.own_now)
            + politeness
                * ((self.new_follower_after - self.new_follower_now)
                    + (self.old_follower_after - self.old_follower_now))
    }
}

impl World {
    pub(crate) fn lane_changes(&mut self) {
        self.mainline_changes();
        self.ramp_merges();
    }

    fn mainline_changes(&mut self) {
        let driving = self.scenario.driving.clone();
        let n = self.scenario.network.clone();
        let rightmost = n.rightmost_lane();
        let cooldown_steps = (driving.lc_cooldown / self.scenario.control.dt).round() as u32;
        for l in 0..MAIN_LANES {
            let mut i = self.lanes[l].len();
            while i > 0 {
                i -= 1;
                let (cooldown, route, pos) = {
                    let veh = &self.lanes[l][i];
                    (veh.lc_cooldown, veh.route, veh.pos)
                };
                if cooldown > 0 {
                    continue;
                }
                let to_diverge = n.merge_end() - pos;
                let mandatory_right = route == Route::MainOff
                    && l != rightmost
                    && to_diverge <= driving.mandatory_zone
                    && to_diverge > 0.0;
                let mut executed = false;
                if mandatory_right {
                    // Safety bound relaxes from safe_decel to merge_decel as
                    // the diverge approaches.
                    let urgency = 1.0 - (to_diverge / driving.mandatory_zone).clamp(0.0, 1.0);
                    let b_safe =
                        driving.safe_decel + urgency * (driving.merge_decel - driving.safe_decel);
                    if self.change_is_safe(l, i, l + 1, b_safe, 0.5 * driving.jam_gap) {
                        self.execute_change(l, i, l + 1, cooldown_steps);
                        executed = true;
                    }
                }
                if executed {
                    continue;
                }
                // Discretionary MOBIL move; exit-bound traffic never drifts
                // left on this short corridor.
                let mut targets: Vec<usize> = Vec::with_capacity(2);
                if l > 0 && route != Route::MainOff {
                    targets.push(l - 1);
                }
                if l < rightmost {
                    targets.push(l + 1);
                }
                let mut best: Option<(usize, f64)> = None;
                for &tl in &targets {
                    if !self.change_is_safe(l, i, tl, driving.safe_decel, driving.jam_gap) {
                        continue;
                    }
                    let balance = self.balance_for_change(l, i, tl);
                    let inc = balance.incentive(driving.politeness);
                    if inc > driving.lc_threshold && best.map_or(true, |(_, b)| inc > b) {
                        best = Some((tl, inc));
                    }
                }
                if let Some((tl, _)) = best {
                    self.execute_change(l, i, tl, cooldown_steps);
                }
            }
        }
    }

    /// Physical gaps plus the braking the new follower would need.
    fn change_is_safe(&self, l: usize, i: usize, target: usize, b_safe: f64, margin: f64) -> bool {
        let veh = &self.lanes[l][i];
        let idx = self.lanes[target].partition_point(|v| v.pos < veh.pos);
        if let Some(leader) = self.lanes[target].get(idx) {
            if leader.rear() - veh.pos < margin {
                return false;
            }
        }
        if idx > 0 {
            let follower = &self.lanes[target][idx - 1];
            if veh.rear() - follower.pos < margin {
                return false;
            }
            let after = self.accel_of_against(target, follower, Some(veh));
            if after < -b_safe {
                return false;
            }
        }
        true
    }

    fn balance_for_change(&self, l: usize, i: usize, target: usize) -> ChangeBalance {
        let veh = &self.lanes[l][i];
        let own_now = self.main_accel(l, i);
        let own_leader = self.lanes[l].get(i + 1);
        let idx = self.lanes[target].partition_point(|v| v.pos < veh.pos);
        let new_leader = self.lanes[target].get(idx);
        let new_follower = if idx > 0 { Some(&self.lanes[target][idx - 1]) } else { None };
        let old_follower = if i > 0 { Some(&self.lanes[l][i - 1]) } else { None };

        let own_after = self.accel_of_against(target, veh, new_leader);
        let new_follower_now = new_follower
            .map(|f| self.accel_of_against(target, f, new_leader))
            .unwrap_or(0.0);
        let new_follower_after =
            new_follower.map(|f| self.accel_of_against(target, f, Some(veh))).unwrap_or(0.0);
        let old_follower_now =
            old_follower.map(|f| self.accel_of_against(l, f, Some(veh))).unwrap_or(0.0);
        let old_follower_after =
            old_follower.map(|f| self.accel_of_against(l, f, own_leader)).unwrap_or(0.0);
        ChangeBalance {
            own_now,
            own_after,
            new_follower_now,
            new_follower_after,
            old_follower_now,
            old_follower_after,
        }
    }

    /// IDM acceleration `subject` would have in `lane` against `leader`.
    fn accel_of_against(&self, lane: usize, subject: &Vehicle, leader: Option<&Vehicle>) -> f64 {
        let spec = self.scenario.vehicles.spec(subject.class);
        let n = &self.scenario.network;
        let limit = limit_at(n, &self.controlled_limits, lane, subject.pos);
        let v0 = (spec.desired_speed_factor * limit).min(limit);
        match leader {
            Some(lead) => follow_accel(
                spec,
                &self.scenario.driving,
                subject.speed,
                v0,
                lead.rear() - subject.pos,
                lead.speed,
            ),
            None => free_accel(spec, subject.speed, v0),
        }
    }

    fn execute_change(&mut self, l: usize, i: usize, target: usize, cooldown: u32) {
        let mut veh = self.lanes[l].remove(i);
        veh.lc_cooldown = cooldown;
        let idx = self.lanes[target].partition_point(|v| v.pos < veh.pos);
        self.lanes[target].insert(idx, veh);
    }

    /// Vehicles on the acceleration lane merge into the rightmost main lane
    /// when the gap is acceptable.
    fn ramp_merges(&mut self) {
        let driving = self.scenario.driving.clone();
        let n = self.scenario.network.clone();
        let rightmost = n.rightmost_lane();
        let margin = 0.5 * driving.jam_gap;
        let mut i = self.ramp.len();
        while i > 0 {
            i -= 1;
            let veh = &self.ramp[i];
            if veh.pos < n.ramp_length {
                continue;
            }
            let x = n.merge_start() + (veh.pos - n.ramp_length);
            let idx = self.lanes[rightmost].partition_point(|v| v.pos < x);
            if let Some(leader) = self.lanes[rightmost].get(idx) {
                if leader.rear() - x < margin {
                    continue;
                }
            }
            if idx > 0 {
                let follower = &self.lanes[rightmost][idx - 1];
                if (x - veh.length) - follower.pos < margin {
                    continue;
                }
                let spec = self.scenario.vehicles.spec(follower.class);
                let limit = limit_at(&n, &self.controlled_limits, rightmost, follower.pos);
                let v0 = (spec.desired_speed_factor * limit).min(limit);
                let after = follow_accel(
                    spec,
                    &driving,
                    follower.speed,
                    v0,
                    (x - veh.length) - follower.pos,
                    veh.speed,
                );
                if after < -driving.merge_decel {
                    continue;
                }
            }
            let mut veh = self.ramp.remove(i);
            veh.pos = x;
            veh.prev_pos = x;
            veh.lc_cooldown = (driving.lc_cooldown / self.scenario.control.dt).round() as u32;
            self.lanes[rightmost].insert(idx, veh);
        }
    }
}
