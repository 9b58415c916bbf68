//! The control-interval environment: applies per-lane limits, advances the
//! world one minute, and reports state, rewards and episode accounting.

use serde::{Deserialize, Serialize};

use dvsl_sim::{IntervalMetrics, Scenario, World};

use crate::action::{action_to_speeds, ActionVector};
use crate::reward::{RewardKind, RewardSet};
use crate::state::StateVector;
use crate::trace::TraceRow;
use crate::EnvError;

/// One stored experience record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub t: usize,
    pub state: StateVector,
    pub action: ActionVector,
    pub reward: f64,
    pub next_state: StateVector,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: StateVector,
    pub reward: f64,
    pub rewards: RewardSet,
    pub done: bool,
    pub metrics: IntervalMetrics,
}

/// Travel-time accounting at episode end. `direct` and `per_vehicle` agree
/// exactly; the flow reconstruction is detector-based and quantized to the
/// control interval, so it is diagnostic only.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TtsReport {
    pub direct: f64,
    pub per_vehicle: f64,
    pub flow_reconstruction: f64,
    pub completed: u64,
    pub residual_vehicles: usize,
    pub missed_exits: u64,
    /// Mean travel time of completed vehicles; 0 when none completed.
    pub att: f64,
}

pub struct TrafficEnv {
    world: World,
    reward_kind: RewardKind,
    intervals_done: usize,
    episode_intervals: usize,
    state: StateVector,
    trace: Vec<TraceRow>,
    // Running flow sums for the interval-level TTS reconstruction.
    net_count_estimate: i64,
    flow_tts: f64,
}

impl TrafficEnv {
    pub fn new(scenario: &Scenario, reward_kind: RewardKind, demand_seed: u64) -> Result<Self, EnvError> {
        let world = World::new(scenario, demand_seed)?;
        let episode_intervals = scenario.control.episode_intervals;
        Ok(TrafficEnv {
            world,
            reward_kind,
            intervals_done: 0,
            episode_intervals,
            state: StateVector::zeros(),
            trace: Vec::with_capacity(episode_intervals),
            net_count_estimate: 0,
            flow_tts: 0.0,
        })
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    /// Observation at the start of the episode (no interval elapsed yet).
    pub fn state(&self) -> StateVector {
        self.state
    }

    pub fn done(&self) -> bool {
        self.intervals_done >= self.episode_intervals
    }

    pub fn episode_intervals(&self) -> usize {
        self.episode_intervals
    }

    pub fn demand_checksum(&self) -> u64 {
        self.world.demand_checksum()
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    /// Direct world access for scripted scenarios in tests.
    pub fn world_mut(&mut self) -> &mut World {
        &mut self.world
    }

    /// Applies the action for one control interval: converts indices to
    /// limits, runs the per-second dynamics, then observes and scores.
    pub fn step(&mut self, action: &ActionVector) -> Result<StepResult, EnvError> {
        if self.done() {
            return Err(EnvError::Protocol(format!(
                "step called after episode end ({} intervals)",
                self.episode_intervals
            )));
        }
        let limits = action_to_speeds(action);
        let steps = self.world.scenario().control.steps_per_interval;
        for _ in 0..steps {
            self.world.step(&limits.0);
        }
        let metrics = self.world.read_interval();
        let next_state = StateVector::from_metrics(&metrics);
        let rewards = RewardSet::from_metrics(&metrics);
        let reward = rewards.get(self.reward_kind);
        self.intervals_done += 1;

        let interval_s = steps as f64 * self.world.scenario().control.dt;
        self.net_count_estimate += metrics.inflow as i64 - metrics.outflow as i64;
        self.flow_tts += self.net_count_estimate as f64 * interval_s;

        self.trace.push(TraceRow {
            t: self.intervals_done,
            state: next_state,
            action: *action,
            limits,
            rewards,
            theta: metrics.theta,
            emissions: metrics.emissions,
        });
        self.state = next_state;
        Ok(StepResult { state: next_state, reward, rewards, done: self.done(), metrics })
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    /// Accumulated reward of the selected kind over the episode so far.
    pub fn accumulated_reward(&self) -> f64 {
        self.trace.iter().map(|r| r.rewards.get(self.reward_kind)).sum()
    }

    pub fn accumulated_rewards(&self) -> RewardSet {
        RewardSet {
            r1: self.trace.iter().map(|r| r.rewards.r1).sum(),
            r2: self.trace.iter().map(|r| r.rewards.r2).sum(),
            r3: self.trace.iter().map(|r| r.rewards.r3).sum(),
            r4: self.trace.iter().map(|r| r.rewards.r4).sum(),
        }
    }

    pub fn tts_report(&self) -> TtsReport {
        let w = &self.world;
        let direct = w.tts_direct();
        let per_vehicle = w.completed_travel_time() + w.residual_travel_time();
        let completed = w.completed_count();
        let att = if completed > 0 { w.completed_travel_time() / completed as f64 } else { 0.0 };
        TtsReport {
            direct,
            per_vehicle,
            flow_reconstruction: self.flow_tts,
            completed,
            residual_vehicles: w.vehicle_count(),
            missed_exits: w.missed_exit_count(),
            att,
        }
    }
}
