//! Controller registry: every policy variant lives behind the [`Controller`]
//! trait and is selected by name at runtime from config or the CLI.

use std::path::Path;

use dvsl_env::RewardKind;

use crate::config::AgentConfig;
use crate::controller::{Controller, NoVsl, Trainer};
use crate::ddpg::{DdpgAgent, DdpgController};
use crate::dqn::{DqnAgent, DqnController};
use crate::qlearn::{QLearningAgent, QTableController};
use crate::AgentError;

#[derive(Debug, Clone, Copy)]
pub struct ControllerEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Rewards this controller can be trained with; empty means untrainable.
    pub valid_rewards: &'static [RewardKind],
    pub needs_checkpoint: bool,
}

const ENTRIES: [ControllerEntry; 4] = [
    ControllerEntry {
        name: "novsl",
        description: "static 65 mph limits, no control",
        valid_rewards: &[],
        needs_checkpoint: false,
    },
    ControllerEntry {
        name: "qlearning",
        description: "tabular Q-learning, one shared limit per step",
        valid_rewards: &[RewardKind::R1Flow],
        needs_checkpoint: true,
    },
    ControllerEntry {
        name: "dqn",
        description: "deep Q-network, one shared limit per step",
        valid_rewards: &[RewardKind::R1Flow],
        needs_checkpoint: true,
    },
    ControllerEntry {
        name: "ddpg",
        description: "actor-critic with per-lane limits",
        valid_rewards: &RewardKind::ALL,
        needs_checkpoint: true,
    },
];

pub fn registry() -> &'static [ControllerEntry] {
    &ENTRIES
}

pub fn find(name: &str) -> Option<&'static ControllerEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

/// Lists the trainable (controller, reward) pairs for usage errors.
pub fn valid_training_pairs() -> Vec<String> {
    let mut pairs = Vec::new();
    for e in &ENTRIES {
        for r in e.valid_rewards {
            pairs.push(format!("{} + {}", e.name, r.label()));
        }
    }
    pairs
}

impl ControllerEntry {
    pub fn supports_reward(&self, kind: RewardKind) -> bool {
        self.valid_rewards.contains(&kind)
    }

    /// Builds the frozen controller, loading the checkpoint when the variant
    /// needs one.
    pub fn load(
        &self,
        checkpoint: Option<&Path>,
        config: &AgentConfig,
    ) -> Result<Box<dyn Controller>, AgentError> {
        match (self.name, checkpoint) {
            ("novsl", _) => Ok(Box::new(NoVsl)),
            (name, None) => Err(AgentError::Checkpoint(format!(
                "controller '{name}' requires a checkpoint path"
            ))),
            ("qlearning", Some(p)) => {
                Ok(Box::new(QTableController::load(p, config.bin_edges)?))
            }
            ("dqn", Some(p)) => Ok(Box::new(DqnController::load(p)?)),
            ("ddpg", Some(p)) => Ok(Box::new(DdpgController::load(p)?)),
            (name, _) => Err(AgentError::Config(format!("unknown controller '{name}'"))),
        }
    }

    /// Instantiates a fresh trainer for this variant.
    pub fn make_trainer(
        &self,
        reward: RewardKind,
        config: &AgentConfig,
        seed: u64,
    ) -> Result<Box<dyn Trainer>, AgentError> {
        if !self.supports_reward(reward) {
            return Err(AgentError::Config(format!(
                "controller '{}' cannot be trained with {}; valid pairs: {}",
                self.name,
                reward.label(),
                valid_training_pairs().join(", ")
            )));
        }
        match self.name {
            "qlearning" => Ok(Box::new(QLearningAgent::new(reward, config, seed)?)),
            "dqn" => Ok(Box::new(DqnAgent::new(reward, config, seed)?)),
            "ddpg" => Ok(Box::new(DdpgAgent::new(reward, config, seed)?)),
            name => Err(AgentError::Config(format!(
                "controller '{name}' is not trainable; valid pairs: {}",
                valid_training_pairs().join(", ")
            ))),
        }
    }
}
