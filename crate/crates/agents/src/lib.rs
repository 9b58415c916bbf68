//! Speed-limit control agents: the actor-critic per-lane controller, the
//! tabular and deep value baselines, and the no-control reference, all
//! behind one [`Controller`] trait and a name-keyed registry.

mod config;
mod controller;
mod ddpg;
mod dqn;
mod error;
mod logs;
mod noise;
mod qlearn;
mod registry;
mod replay;

pub use config::{derive_seed, AgentConfig};
pub use controller::{Controller, NoVsl, TrainOutcome, TrainRun, Trainer};
pub use ddpg::{DdpgAgent, DdpgController, UpdateStats};
pub use dqn::{DqnAgent, DqnController};
pub use error::AgentError;
pub use logs::{
    episode_log_header, episode_log_row, train_log_header, train_log_row, EpisodeRecord,
    TrainStepRecord,
};
pub use noise::LaplaceNoise;
pub use qlearn::{discretize_state, q_learning_step, QLearningAgent, QTable, QTableController,
    N_DISCRETE_STATES};
pub use registry::{find, names, registry, valid_training_pairs, ControllerEntry};
pub use replay::ReplayMemory;
