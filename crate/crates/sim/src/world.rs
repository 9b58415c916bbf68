//! The discrete-time lane-level world: arrival insertion, car following,
//! per-lane speed-limit enforcement, retirement, sensing and accounting.

use std::collections::VecDeque;

use crate::braking::BrakeMonitor;
use crate::demand::{generate_demand_seeded, schedule_checksum, Arrival};
use crate::detector::{PointDetector, Station, StationReading};
use crate::emissions::{step_emissions, EmissionTotals};
use crate::idm::{anticipation_accel, follow_accel, free_accel, stop_point_accel};
use crate::scenario::{NetworkLayout, Scenario, MAIN_LANES};
use crate::{Route, SimError, Vehicle, VehicleClass, VehicleId};

/// Where a vehicle lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanePlace {
    Main(usize),
    Ramp,
}

/// What one simulation step did, for conservation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepSummary {
    pub inserted: u32,
    pub retired: u32,
    pub count: usize,
}

/// Aggregated sensing over one control interval.
#[derive(Debug, Clone)]
pub struct IntervalMetrics {
    /// End-of-interval simulation time, s.
    pub time: f64,
    pub upstream: StationReading,
    pub merge: StationReading,
    pub ramp: StationReading,
    pub inflow: u32,
    pub outflow: u32,
    /// Vehicles that braked harder than the emergency threshold.
    pub theta: u32,
    pub emissions: EmissionTotals,
    pub limits: [f64; MAIN_LANES],
}

pub struct World {
    pub(crate) scenario: Scenario,
    schedule: Vec<Arrival>,
    schedule_pos: usize,
    demand_checksum: u64,
    main_queue: VecDeque<(Route, VehicleClass)>,
    ramp_queue: VecDeque<(Route, VehicleClass)>,
    /// Main lanes 0 (leftmost) .. 4 (rightmost), each ascending by position.
    pub(crate) lanes: Vec<Vec<Vehicle>>,
    /// On-ramp plus acceleration lane, ascending by ramp-frame position.
    pub(crate) ramp: Vec<Vehicle>,
    next_id: u64,
    step_count: u64,
    pub(crate) controlled_limits: [f64; MAIN_LANES],
    upstream_dets: Vec<PointDetector>,
    merge_dets: Vec<PointDetector>,
    ramp_det: PointDetector,
    brake: BrakeMonitor,
    interval_emissions: EmissionTotals,
    interval_inflow: u32,
    interval_outflow: u32,
    episode_emissions: EmissionTotals,
    total_inflow: u64,
    total_outflow: u64,
    tts_seconds: f64,
    completed: u64,
    completed_time: f64,
    missed_exits: u64,
}

pub(crate) fn limit_at(
    layout: &NetworkLayout,
    controlled: &[f64; MAIN_LANES],
    lane: usize,
    x: f64,
) -> f64 {
    if x >= layout.controlled_start() && x < layout.controlled_end() {
        controlled[lane]
    } else {
        layout.default_main_limit
    }
}

impl World {
    pub fn new(scenario: &Scenario, demand_seed: u64) -> Result<World, SimError> {
        scenario.validate()?;
        let schedule = generate_demand_seeded(&scenario.demand, demand_seed)?;
        let demand_checksum = schedule_checksum(&schedule);
        let n = &scenario.network;
        let up_x = n.controlled_start() - scenario.detectors.upstream_setback;
        let mrg_x = n.merge_start() + scenario.detectors.merge_offset.min(n.merge_length - 1.0);
        let ramp_x = n.ramp_length - scenario.detectors.ramp_setback;
        Ok(World {
            scenario: scenario.clone(),
            schedule,
            schedule_pos: 0,
            demand_checksum,
            main_queue: VecDeque::new(),
            ramp_queue: VecDeque::new(),
            lanes: vec![Vec::new(); MAIN_LANES],
            ramp: Vec::new(),
            next_id: 0,
            step_count: 0,
            controlled_limits: [n.default_main_limit; MAIN_LANES],
            upstream_dets: (0..MAIN_LANES).map(|_| PointDetector::new(up_x)).collect(),
            merge_dets: (0..MAIN_LANES).map(|_| PointDetector::new(mrg_x)).collect(),
            ramp_det: PointDetector::new(ramp_x),
            brake: BrakeMonitor::default(),
            interval_emissions: EmissionTotals::default(),
            interval_inflow: 0,
            interval_outflow: 0,
            episode_emissions: EmissionTotals::default(),
            total_inflow: 0,
            total_outflow: 0,
            tts_seconds: 0.0,
            completed: 0,
            completed_time: 0.0,
            missed_exits: 0,
        })
    }

    /// Advances the world by one `dt` step under the given per-lane limits
    /// for the controlled section.
    pub fn step(&mut self, limits: &[f64; MAIN_LANES]) -> StepSummary {
        let dt = self.scenario.control.dt;
        let t = self.step_count as f64 * dt;
        self.controlled_limits = *limits;
        let inserted = self.process_arrivals(t);
        self.lane_changes();
        self.advance(dt);
        let retired = self.retire(t);
        let count = self.vehicle_count();
        self.tts_seconds += count as f64 * dt;
        self.step_count += 1;
        StepSummary { inserted, retired, count }
    }

    // ------------------------------------------------------------------
    // Arrivals
    // ------------------------------------------------------------------

    fn process_arrivals(&mut self, t: f64) -> u32 {
        let dt = self.scenario.control.dt;
        while self.schedule_pos < self.schedule.len() && self.schedule[self.schedule_pos].time < t + dt {
            let a = &self.schedule[self.schedule_pos];
            match a.route {
                Route::OnMain => self.ramp_queue.push_back((a.route, a.class)),
                _ => self.main_queue.push_back((a.route, a.class)),
            }
            self.schedule_pos += 1;
        }
        let mut inserted = 0;
        inserted += self.drain_main_queue(t);
        inserted += self.drain_ramp_queue(t);
        inserted
    }

    fn drain_main_queue(&mut self, t: f64) -> u32 {
        let jam_gap = self.scenario.driving.jam_gap;
        let min_gap = self.scenario.driving.min_entry_gap;
        let headway = self.scenario.driving.headway_time;
        let n = self.scenario.network.clone();
        let mut inserted = 0;
        while let Some(&(route, class)) = self.main_queue.front() {
            let spec = self.scenario.vehicles.spec(class).clone();
            // Exit-bound traffic enters on the right two lanes; it never has
            // to cross the full carriageway to reach the diverge.
            let allowed: &[usize] = if route == Route::MainOff {
                &[MAIN_LANES - 2, MAIN_LANES - 1]
            } else {
                &[0, 1, 2, 3, 4]
            };
            // Clearance per lane: rear bumper of the rearmost vehicle.
            let mut best: Option<(usize, f64)> = None;
            let mut candidates: Vec<(usize, f64)> = Vec::with_capacity(MAIN_LANES);
            for &l in allowed {
                let clearance = match self.lanes[l].first() {
                    Some(v) => v.rear(),
                    None => f64::INFINITY,
                };
                if clearance >= min_gap {
                    candidates.push((l, clearance));
                    if best.map_or(true, |(_, c)| clearance > c) {
                        best = Some((l, clearance));
                    }
                }
            }
            let Some((_, best_c)) = best else { break };
            let near: Vec<usize> = candidates
                .iter()
                .filter(|(_, c)| *c >= best_c - 1.0 || c.is_infinite())
                .map(|(l, _)| *l)
                .collect();
            let lane = if route == Route::MainOff {
                *near.last().expect("nonempty")
            } else {
                near[(self.next_id as usize) % near.len()]
            };
            let clearance = match self.lanes[lane].first() {
                Some(v) => v.rear(),
                None => f64::INFINITY,
            };
            let limit = limit_at(&n, &self.controlled_limits, lane, 0.0);
            let v0 = (spec.desired_speed_factor * limit).min(limit);
            let speed = if clearance.is_finite() {
                v0.min(((clearance - jam_gap) / headway).max(0.0))
            } else {
                v0
            };
            let veh = self.make_vehicle(class, route, 0.0, speed, t);
            self.lanes[lane].insert(0, veh);
            self.main_queue.pop_front();
            inserted += 1;
        }
        inserted
    }

    fn drain_ramp_queue(&mut self, t: f64) -> u32 {
        let jam_gap = self.scenario.driving.jam_gap;
        let headway = self.scenario.driving.headway_time;
        let ramp_limit = self.scenario.network.default_ramp_limit;
        let mut inserted = 0;
        let min_gap = self.scenario.driving.min_entry_gap;
        while let Some(&(route, class)) = self.ramp_queue.front() {
            let spec = self.scenario.vehicles.spec(class).clone();
            let clearance = match self.ramp.first() {
                Some(v) => v.rear(),
                None => f64::INFINITY,
            };
            if clearance < min_gap {
                break;
            }
            let v0 = (spec.desired_speed_factor * ramp_limit).min(ramp_limit);
            let speed = if clearance.is_finite() {
                v0.min(((clearance - jam_gap) / headway).max(0.0))
            } else {
                v0
            };
            let veh = self.make_vehicle(class, route, 0.0, speed, t);
            self.ramp.insert(0, veh);
            self.ramp_queue.pop_front();
            inserted += 1;
        }
        inserted
    }

    fn make_vehicle(
        &mut self,
        class: VehicleClass,
        route: Route,
        pos: f64,
        speed: f64,
        t: f64,
    ) -> Vehicle {
        let id = VehicleId(self.next_id);
        self.next_id += 1;
        self.interval_inflow += 1;
        self.total_inflow += 1;
        let length = self.scenario.vehicles.spec(class).length;
        Vehicle {
            id,
            class,
            route,
            pos,
            prev_pos: pos,
            speed,
            accel: 0.0,
            length,
            entry_time: t,
            lc_cooldown: 0,
        }
    }

    /// Places a vehicle directly, for scripted scenarios and tests. Counted
    /// as inflow so conservation bookkeeping stays exact.
    pub fn spawn_vehicle(
        &mut self,
        place: LanePlace,
        pos: f64,
        speed: f64,
        class: VehicleClass,
        route: Route,
    ) -> VehicleId {
        let t = self.time();
        let veh = self.make_vehicle(class, route, pos, speed, t);
        let id = veh.id;
        let container = match place {
            LanePlace::Main(l) => &mut self.lanes[l],
            LanePlace::Ramp => &mut self.ramp,
        };
        let idx = container.partition_point(|v| v.pos < pos);
        container.insert(idx, veh);
        id
    }

    // ------------------------------------------------------------------
    // Car following and movement
    // ------------------------------------------------------------------

    pub(crate) fn main_accel(&self, l: usize, i: usize) -> f64 {
        let veh = &self.lanes[l][i];
        let spec = self.scenario.vehicles.spec(veh.class);
        let driving = &self.scenario.driving;
        let n = &self.scenario.network;
        let limit = limit_at(n, &self.controlled_limits, l, veh.pos);
        let v0 = (spec.desired_speed_factor * limit).min(limit);
        let mut a = match self.lanes[l].get(i + 1) {
            Some(lead) => {
                follow_accel(spec, driving, veh.speed, v0, lead.rear() - veh.pos, lead.speed)
            }
            None => free_accel(spec, veh.speed, v0),
        };
        // Anticipate static limit drops at section boundaries ahead.
        for (bx, blim) in [
            (n.controlled_start(), self.controlled_limits[l]),
            (n.controlled_end(), n.default_main_limit),
        ] {
            let d = bx - veh.pos;
            if d > 0.0 && d <= driving.limit_lookahead {
                if let Some(req) = anticipation_accel(veh.speed, blim, d) {
                    a = a.min(req);
                }
            }
        }
        // An off-ramp vehicle stuck left of the exit treats the diverge as a
        // stop line until a right change succeeds.
        if veh.route == Route::MainOff && l != n.rightmost_lane() {
            let d = n.merge_end() - veh.pos;
            if d <= driving.stopline_zone {
                a = a.min(stop_point_accel(spec, driving, veh.speed, d));
            }
        }
        a.max(-spec.max_brake)
    }

    pub(crate) fn ramp_accel(&self, i: usize) -> f64 {
        let veh = &self.ramp[i];
        let spec = self.scenario.vehicles.spec(veh.class);
        let driving = &self.scenario.driving;
        let n = &self.scenario.network;
        let v0 = (spec.desired_speed_factor * n.default_ramp_limit).min(n.default_ramp_limit);
        let mut a = match self.ramp.get(i + 1) {
            Some(lead) => {
                follow_accel(spec, driving, veh.speed, v0, lead.rear() - veh.pos, lead.speed)
            }
            None => free_accel(spec, veh.speed, v0),
        };
        // The acceleration lane ends at a hard wall unless the vehicle merges.
        let wall_gap = n.ramp_end() - veh.pos;
        a = a.min(stop_point_accel(spec, driving, veh.speed, wall_gap));
        a.max(-spec.max_brake)
    }

    fn advance(&mut self, dt: f64) {
        let n = self.scenario.network.clone();
        let tol = n.compliance_tolerance;
        for l in 0..MAIN_LANES {
            let len = self.lanes[l].len();
            let accels: Vec<f64> = (0..len).map(|i| self.main_accel(l, i)).collect();
            let old_speeds: Vec<f64> = self.lanes[l].iter().map(|v| v.speed).collect();
            for (i, veh) in self.lanes[l].iter_mut().enumerate() {
                let lim_here = limit_at(&n, &self.controlled_limits, l, veh.pos) + tol;
                let v_tent = (veh.speed + accels[i] * dt).clamp(0.0, lim_here);
                let x_tent = veh.pos + v_tent * dt;
                let v_new = v_tent.min(limit_at(&n, &self.controlled_limits, l, x_tent) + tol);
                veh.prev_pos = veh.pos;
                veh.pos += v_new * dt;
                veh.speed = v_new;
                veh.lc_cooldown = veh.lc_cooldown.saturating_sub(1);
            }
            project_lane(&mut self.lanes[l], dt);
            for (i, veh) in self.lanes[l].iter_mut().enumerate() {
                veh.accel = (veh.speed - old_speeds[i]) / dt;
            }
        }
        {
            let len = self.ramp.len();
            let accels: Vec<f64> = (0..len).map(|i| self.ramp_accel(i)).collect();
            let old_speeds: Vec<f64> = self.ramp.iter().map(|v| v.speed).collect();
            let ramp_lim = n.default_ramp_limit + tol;
            for (i, veh) in self.ramp.iter_mut().enumerate() {
                let v_new = (veh.speed + accels[i] * dt).clamp(0.0, ramp_lim);
                veh.prev_pos = veh.pos;
                veh.pos += v_new * dt;
                veh.speed = v_new;
                veh.lc_cooldown = veh.lc_cooldown.saturating_sub(1);
            }
            project_lane(&mut self.ramp, dt);
            for (i, veh) in self.ramp.iter_mut().enumerate() {
                veh.accel = (veh.speed - old_speeds[i]) / dt;
            }
        }
        self.sense(dt);
    }

    /// Detector coverage, emission and braking surveillance for the step
    /// that just moved every vehicle.
    fn sense(&mut self, dt: f64) {
        let n = self.scenario.network.clone();
        let mut step_emis = EmissionTotals::default();
        for l in 0..MAIN_LANES {
            for veh in &self.lanes[l] {
                self.upstream_dets[l].record_step(veh.prev_pos, veh.pos, veh.length, veh.speed, dt);
                self.merge_dets[l].record_step(veh.prev_pos, veh.pos, veh.length, veh.speed, dt);
                self.brake.record(veh.id, veh.accel);
                if veh.pos >= n.controlled_start() && veh.pos <= n.merge_end() {
                    let coeffs = self.scenario.emissions.coeffs(veh.class);
                    step_emis.add(&step_emissions(coeffs, veh.speed, veh.accel, dt));
                }
            }
        }
        for veh in &self.ramp {
            self.ramp_det.record_step(veh.prev_pos, veh.pos, veh.length, veh.speed, dt);
            self.brake.record(veh.id, veh.accel);
        }
        self.interval_emissions.add(&step_emis);
        self.episode_emissions.add(&step_emis);
    }

    // ------------------------------------------------------------------
    // Retirement
    // ------------------------------------------------------------------

    fn retire(&mut self, t: f64) -> u32 {
        let n = self.scenario.network.clone();
        let rightmost = n.rightmost_lane();
        let mut retired = 0u32;
        for l in 0..MAIN_LANES {
            let lane = std::mem::take(&mut self.lanes[l]);
            let mut kept = Vec::with_capacity(lane.len());
            for mut veh in lane {
                if veh.route == Route::MainOff && veh.pos >= n.merge_end() {
                    if l == rightmost {
                        self.finish_vehicle(&veh, t);
                        retired += 1;
                        continue;
                    }
                    // Missed the exit: continues downstream on the mainline.
                    veh.route = Route::MainMain;
                    self.missed_exits += 1;
                }
                if veh.pos >= n.main_end() {
                    self.finish_vehicle(&veh, t);
                    retired += 1;
                } else {
                    kept.push(veh);
                }
            }
            self.lanes[l] = kept;
        }
        retired
    }

    fn finish_vehicle(&mut self, veh: &Vehicle, t: f64) {
        self.interval_outflow += 1;
        self.total_outflow += 1;
        self.completed += 1;
        self.completed_time += t - veh.entry_time;
    }

    // ------------------------------------------------------------------
    // Sensing interface
    // ------------------------------------------------------------------

    /// Reads and resets all interval accumulators. Call once per control
    /// interval.
    pub fn read_interval(&mut self) -> IntervalMetrics {
        let interval = self.scenario.control.steps_per_interval as f64 * self.scenario.control.dt;
        let upstream = self.read_station(Station::Upstream, interval);
        let merge = self.read_station(Station::Merge, interval);
        let ramp = self.read_station(Station::Ramp, interval);
        let inflow = std::mem::take(&mut self.interval_inflow);
        let outflow = std::mem::take(&mut self.interval_outflow);
        let theta = self.brake.take_count();
        let emissions = std::mem::take(&mut self.interval_emissions);
        IntervalMetrics {
            time: self.time(),
            upstream,
            merge,
            ramp,
            inflow,
            outflow,
            theta,
            emissions,
            limits: self.controlled_limits,
        }
    }

    /// Reads one station's per-lane aggregates and resets that station.
    pub fn read_station(&mut self, station: Station, interval: f64) -> StationReading {
        let n = &self.scenario.network;
        let (dets, fallbacks): (&mut Vec<PointDetector>, Vec<f64>) = match station {
            Station::Upstream => {
                let f = (0..MAIN_LANES)
                    .map(|l| {
                        limit_at(n, &self.controlled_limits, l, n.controlled_start()
                            - self.scenario.detectors.upstream_setback)
                    })
                    .collect();
                (&mut self.upstream_dets, f)
            }
            Station::Merge => {
                let f = vec![n.default_main_limit; MAIN_LANES];
                (&mut self.merge_dets, f)
            }
            Station::Ramp => {
                let r = self.ramp_det.read(interval, n.default_ramp_limit);
                return StationReading {
                    occupancy: vec![r.occupancy],
                    mean_speed: vec![r.mean_speed],
                    flow: vec![r.flow],
                };
            }
        };
        let mut occupancy = Vec::with_capacity(dets.len());
        let mut mean_speed = Vec::with_capacity(dets.len());
        let mut flow = Vec::with_capacity(dets.len());
        for (det, fb) in dets.iter_mut().zip(fallbacks) {
            let r = det.read(interval, fb);
            occupancy.push(r.occupancy);
            mean_speed.push(r.mean_speed);
            flow.push(r.flow);
        }
        StationReading { occupancy, mean_speed, flow }
    }

    // ------------------------------------------------------------------
    // Accessors and accounting
    // ------------------------------------------------------------------

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn time(&self) -> f64 {
        self.step_count as f64 * self.scenario.control.dt
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn vehicle_count(&self) -> usize {
        self.lanes.iter().map(Vec::len).sum::<usize>() + self.ramp.len()
    }

    pub fn demand_checksum(&self) -> u64 {
        self.demand_checksum
    }

    pub fn controlled_limits(&self) -> &[f64; MAIN_LANES] {
        &self.controlled_limits
    }

    /// Direct vehicle-seconds accounting: sum over steps of count * dt.
    pub fn tts_direct(&self) -> f64 {
        self.tts_seconds
    }

    /// Sum of (exit - entry) over retired vehicles.
    pub fn completed_travel_time(&self) -> f64 {
        self.completed_time
    }

    /// Time accumulated by vehicles still in the network, as of now.
    pub fn residual_travel_time(&self) -> f64 {
        let t = self.time();
        self.lanes
            .iter()
            .flatten()
            .chain(self.ramp.iter())
            .map(|v| t - v.entry_time)
            .sum()
    }

    pub fn completed_count(&self) -> u64 {
        self.completed
    }

    pub fn missed_exit_count(&self) -> u64 {
        self.missed_exits
    }

    pub fn total_inflow(&self) -> u64 {
        self.total_inflow
    }

    pub fn total_outflow(&self) -> u64 {
        self.total_outflow
    }

    pub fn episode_emissions(&self) -> EmissionTotals {
        self.episode_emissions
    }

    /// Emergency-braking count of the running interval, without resetting.
    pub fn interval_theta(&self) -> u32 {
        self.brake.count()
    }

    pub fn vehicles(&self) -> impl Iterator<Item = (LanePlace, &Vehicle)> {
        self.lanes
            .iter()
            .enumerate()
            .flat_map(|(l, lane)| lane.iter().map(move |v| (LanePlace::Main(l), v)))
            .chain(self.ramp.iter().map(|v| (LanePlace::Ramp, v)))
    }

    /// Checks ordering, overlap, speed and limit-compliance invariants.
    pub fn validate_invariants(&self) -> Result<(), String> {
        let n = &self.scenario.network;
        let tol = n.compliance_tolerance + 1e-9;
        for (l, lane) in self.lanes.iter().enumerate() {
            for w in lane.windows(2) {
                let gap = w[1].rear() - w[0].pos;
                if gap < -1e-9 {
                    return Err(format!(
                        "overlap in lane {l}: {:?} at {:.3} behind {:?} at {:.3}",
                        w[0].id, w[0].pos, w[1].id, w[1].pos
                    ));
                }
            }
            for v in lane {
                if !(v.speed >= 0.0) || !v.speed.is_finite() {
                    return Err(format!("bad speed {} for {:?}", v.speed, v.id));
                }
                let lim = limit_at(n, &self.controlled_limits, l, v.pos);
                if v.speed > lim + tol {
                    return Err(format!(
                        "limit violation in lane {l}: {:?} at {:.2} m/s over {:.2}",
                        v.id, v.speed, lim
                    ));
                }
            }
        }
        for w in self.ramp.windows(2) {
            if w[1].rear() - w[0].pos < -1e-9 {
                return Err(format!("overlap on ramp: {:?} behind {:?}", w[0].id, w[1].id));
            }
        }
        for v in &self.ramp {
            if !(v.speed >= 0.0) || v.speed > n.default_ramp_limit + tol {
                return Err(format!("ramp speed violation {} for {:?}", v.speed, v.id));
            }
        }
        Ok(())
    }
}

/// Pulls followers back so no vehicle overlaps its leader. Positions only
/// ever move backward toward `prev_pos`, never behind it, so displacement
/// stays non-negative.
fn project_lane(lane: &mut [Vehicle], dt: f64) {
    if lane.len() < 2 {
        return;
    }
    for i in (0..lane.len() - 1).rev() {
        let bound = lane[i + 1].pos - lane[i + 1].length;
        if lane[i].pos > bound {
            let fixed = bound.max(lane[i].prev_pos);
            lane[i].pos = fixed;
            lane[i].speed = (fixed - lane[i].prev_pos) / dt;
        }
    }
}
