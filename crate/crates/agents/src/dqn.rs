//! Deep Q-network baseline: one value head per shared speed-limit option,
//! epsilon-greedy behavior, recency-ranked replay and a soft-updated target.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dvsl_env::{ActionVector, RewardKind, StateVector, TrafficEnv, Transition, M_ACTIONS, STATE_DIM};
use dvsl_neural::{soft_update, Activation, Adam, AdamConfig, Gradients, Mlp, StepOutcome};
use dvsl_sim::Scenario;

use crate::config::{derive_seed, AgentConfig};
use crate::controller::{Controller, TrainOutcome, TrainRun, Trainer};
use crate::logs::{EpisodeRecord, TrainStepRecord};
use crate::replay::ReplayMemory;
use crate::AgentError;

pub struct DqnAgent {
    pub(crate) net: Mlp,
    target: Mlp,
    opt: Adam,
    replay: ReplayMemory,
    config: AgentConfig,
    reward_kind: RewardKind,
    rng: ChaCha8Rng,
    epsilon_steps: u32,
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl DqnAgent {
    pub fn new(reward_kind: RewardKind, config: &AgentConfig, seed: u64) -> Result<Self, AgentError> {
        config.validate()?;
        let net = Mlp::two_layer(
            STATE_DIM,
            config.hidden,
            M_ACTIONS,
            Activation::Identity,
            1.0,
            derive_seed(seed, 13, 0),
        );
        let target = net.clone();
        let opt = Adam::new(AdamConfig::with_lr(config.critic_lr), &net);
        Ok(DqnAgent {
            net,
            target,
            opt,
            replay: ReplayMemory::new(config.replay_capacity),
            config: config.clone(),
            reward_kind,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 14, 0)),
            epsilon_steps: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        (self.config.dqn_epsilon_start * self.config.epsilon_decay.powi(self.epsilon_steps as i32))
            .max(self.config.epsilon_min)
    }

    /// Epsilon-greedy over the 6 shared-limit options.
    pub fn behavior_action(&mut self, state: &StateVector) -> Result<usize, AgentError> {
        let eps = self.epsilon();
        self.epsilon_steps += 1;
        if self.rng.random_range(0.0..1.0) < eps {
            return Ok(self.rng.random_range(0..M_ACTIONS));
        }
        let q = self.net.forward(&state.0).map_err(AgentError::Neural)?;
        Ok(argmax(q.as_slice().expect("contiguous")))
    }

    pub fn push_transition(&mut self, t: Transition) {
        self.replay.push(t);
    }

    /// TD target for one transition: reward plus the discounted max over the
    /// target head.
    pub fn td_target(&self, t: &Transition) -> Result<f64, AgentError> {
        let q_next = self.target.forward(&t.next_state.0).map_err(AgentError::Neural)?;
        let max_next = q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(t.reward + self.config.gamma * max_next)
    }

    /// Squared TD loss against the max over the target head, with its
    /// parameter gradient.
    pub fn loss_grads(&self, batch: &[Transition]) -> Result<(f64, Gradients), AgentError> {
        let n = batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.net);
        let mut loss = 0.0;
        for t in batch {
            let y = self.td_target(t)?;
            let a = t.action.0[0];
            let trace = self.net.forward_trace(&t.state.0).map_err(AgentError::Neural)?;
            let q = trace.output()[a];
            loss += (y - q) * (y - q);
            let mut upstream = [0.0; M_ACTIONS];
            upstream[a] = 2.0 * (q - y) / n;
            let (g, _) = self.net.backward(&trace, &upstream).map_err(AgentError::Neural)?;
            grads.accumulate(&g);
        }
        Ok((loss / n, grads))
    }

    /// One descent step; returns the pre-step loss.
    pub fn dqn_update(&mut self, batch: &[Transition]) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        let (loss, grads) = self.loss_grads(batch)?;
        if self.opt.step(&mut self.net, &grads) == StepOutcome::SkippedNonFinite {
            log::warn!("dqn update skipped: non-finite gradient");
        }
        Ok(loss)
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn sync_target(&mut self) {
        self.target = self.net.clone();
    }

    pub fn update(&mut self) -> Result<Option<f64>, AgentError> {
        let Some(batch) = self.replay.sample_minibatch(self.config.minibatch, &mut self.rng) else {
            return Ok(None);
        };
        let loss = self.dqn_update(&batch)?;
        soft_update(&mut self.target, &self.net, self.config.tau).map_err(AgentError::Neural)?;
        Ok(Some(loss))
    }
}

/// Frozen greedy DQN policy; the argmax limit is broadcast to all lanes.
pub struct DqnController {
    net: Mlp,
}

impl DqnController {
    pub fn new(net: Mlp) -> Result<Self, AgentError> {
        net.ensure_shape(STATE_DIM, M_ACTIONS).map_err(AgentError::Neural)?;
        Ok(DqnController { net })
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        DqnController::new(Mlp::load(path).map_err(AgentError::Neural)?)
    }
}

impl Controller for DqnController {
    fn kind(&self) -> &'static str {
        "dqn"
    }

    fn action(&self, state: &StateVector) -> ActionVector {
        let q = self.net.forward(&state.0).expect("shape verified at construction");
        ActionVector::uniform(argmax(q.as_slice().expect("contiguous")))
    }
}

impl Trainer for DqnAgent {
    fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    fn train(&mut self, scenario: &Scenario, run: &TrainRun) -> Result<TrainOutcome, AgentError> {
        let mut steps = Vec::new();
        let mut episodes = Vec::new();
        for episode in 0..run.episodes {
            let demand_seed = derive_seed(run.master_seed, 0, episode as u64);
            let mut env = TrafficEnv::new(scenario, self.reward_kind, demand_seed)?;
            let mut state = env.state();
            let mut step_idx = 0usize;
            let mut theta_total = 0.0;
            while !env.done() {
                let a_idx = self.behavior_action(&state)?;
                let action = ActionVector::uniform(a_idx);
                let result = match env.step(&action) {
                    Ok(r) => r,
                    Err(e) => {
                        log::warn!("episode {episode} aborted at step {step_idx}: {e}");
                        break;
                    }
                };
                theta_total += result.metrics.theta as f64;
                self.push_transition(Transition {
                    t: step_idx,
                    state,
                    action,
                    reward: result.reward,
                    next_state: result.state,
                });
                let loss = self.update()?.unwrap_or(0.0);
                let q_now = self.net.forward(&state.0).map_err(AgentError::Neural)?;
                steps.push(TrainStepRecord {
                    episode,
                    step: step_idx,
                    reward_kind: self.reward_kind.label(),
                    reward: result.reward,
                    critic_loss: loss,
                    mean_q: q_now.iter().sum::<f64>() / M_ACTIONS as f64,
                    exploration: self.epsilon(),
                });
                state = result.state;
                step_idx += 1;
            }
            let tts = env.tts_report();
            episodes.push(EpisodeRecord {
                episode,
                accumulated_reward: env.accumulated_reward(),
                att: tts.att,
                completed: tts.completed,
                theta_total,
            });
        }
        Ok(TrainOutcome { steps, episodes })
    }

    fn controller(&self) -> Box<dyn Controller> {
        Box::new(DqnController { net: self.net.clone() })
    }

    fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, AgentError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}_dqn.wts"));
        self.net.save(&path).map_err(AgentError::Neural)?;
        Ok(vec![path])
    }
}
