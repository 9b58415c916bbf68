//! The common policy surface every controller variant implements, plus the
//! trainer abstraction the harness drives.

use std::path::{Path, PathBuf};

use dvsl_env::{action_to_speeds, ActionVector, RewardKind, SpeedLimits, StateVector};
use dvsl_sim::Scenario;

use crate::logs::{EpisodeRecord, TrainStepRecord};
use crate::AgentError;

/// A frozen speed-limit policy: a pure function from the occupancy state to
/// per-lane limits. Evaluation fans episodes out across threads, so frozen
/// policies are shareable.
pub trait Controller: Send + Sync {
    /// Registry name of the controller family.
    fn kind(&self) -> &'static str;

    /// Greedy discrete action for the state.
    fn action(&self, state: &StateVector) -> ActionVector;

    /// Posted limits for the state; the default maps `action` through the
    /// speed table.
    fn limits(&self, state: &StateVector) -> SpeedLimits {
        action_to_speeds(&self.action(state))
    }
}

/// The uncontrolled baseline: 65 mph everywhere, every step.
#[derive(Debug, Clone, Default)]
pub struct NoVsl;

impl Controller for NoVsl {
    fn kind(&self) -> &'static str {
        "novsl"
    }

    fn action(&self, _state: &StateVector) -> ActionVector {
        ActionVector::uniform(3)
    }
}

/// How long to train and from which master seed.
#[derive(Debug, Clone, Copy)]
pub struct TrainRun {
    pub episodes: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub steps: Vec<TrainStepRecord>,
    pub episodes: Vec<EpisodeRecord>,
}

/// A learning controller during training. Implementations run the full
/// episode loop internally and stay deterministic given the run seeds.
pub trait Trainer {
    fn reward_kind(&self) -> RewardKind;

    fn train(&mut self, scenario: &Scenario, run: &TrainRun) -> Result<TrainOutcome, AgentError>;

    /// Frozen snapshot of the current policy.
    fn controller(&self) -> Box<dyn Controller>;

    /// Persists the checkpoint files under `dir` with the given stem and
    /// returns their paths.
    fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, AgentError>;
}
