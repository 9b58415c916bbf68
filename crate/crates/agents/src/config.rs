use serde::{Deserialize, Serialize};

use crate::AgentError;

/// Hyperparameters shared by the learning controllers. Every field has a
/// config-file default; anything not pinned by the experiment protocol is
/// exposed here.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Discount factor, in [0, 1).
    pub gamma: f64,
    /// Target-network blend rate, in (0, 1].
    pub tau: f64,
    pub minibatch: usize,
    pub replay_capacity: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden: usize,
    /// Initial Laplace exploration scale.
    pub noise_scale: f64,
    /// Multiplicative noise decay per control step.
    pub noise_decay: f64,
    /// When set, the bootstrap term enters the TD target undiscounted.
    pub undiscounted_target: bool,
    /// Epsilon-greedy schedule for the value-based baselines.
    pub dqn_epsilon_start: f64,
    pub q_epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    /// Tabular learning rate.
    pub q_alpha: f64,
    /// Occupancy bin edges for the 5-level state discretization.
    pub bin_edges: [f64; 4],
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.99,
            tau: 0.001,
            minibatch: 64,
            replay_capacity: 200_000,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            hidden: 120,
            noise_scale: 2.5,
            noise_decay: 0.999,
            undiscounted_target: false,
            dqn_epsilon_start: 1.0,
            q_epsilon_start: 0.1,
            epsilon_decay: 0.999,
            epsilon_min: 0.01,
            q_alpha: 0.1,
            bin_edges: [0.1, 0.2, 0.3, 0.5],
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(AgentError::Config(format!("gamma must be in [0, 1), got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(AgentError::Config(format!("tau must be in (0, 1], got {}", self.tau)));
        }
        for (name, v) in [
            ("minibatch", self.minibatch as f64),
            ("replay_capacity", self.replay_capacity as f64),
            ("hidden", self.hidden as f64),
        ] {
            if v < 1.0 {
                return Err(AgentError::Config(format!("{name} must be positive")));
            }
        }
        for (name, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("noise_scale", self.noise_scale),
            ("noise_decay", self.noise_decay),
            ("q_alpha", self.q_alpha),
        ] {
            if !(v > 0.0) {
                return Err(AgentError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.bin_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AgentError::Config("bin_edges must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Deterministic seed derivation: one master seed fans out into independent
/// streams (training episodes, evaluation episodes, weight init, ...).
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    // splitmix64 over the combined words.
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add(index.wrapping_mul(0xBF58476D1CE4E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}
