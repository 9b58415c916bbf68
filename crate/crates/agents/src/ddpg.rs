//! Deterministic-policy-gradient controller: a sigmoid-scaled actor emits a
//! continuous 5-vector, the discrete mapping posts per-lane limits, and a
//! state-action critic is bootstrapped through slowly blended target copies.
//! Exploration adds decaying Laplace noise; experience replays with
//! recency-rank priorities.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dvsl_env::{
    map_action_g, ActionVector, RewardKind, StateVector, TrafficEnv, Transition, M_ACTIONS,
    N_CONTROLLED_LANES, STATE_DIM,
};
use dvsl_neural::{soft_update, Activation, Adam, AdamConfig, Gradients, Mlp, StepOutcome};
use dvsl_sim::Scenario;

use crate::config::{derive_seed, AgentConfig};
use crate::controller::{Controller, TrainOutcome, TrainRun, Trainer};
use crate::logs::{EpisodeRecord, TrainStepRecord};
use crate::noise::LaplaceNoise;
use crate::replay::ReplayMemory;
use crate::AgentError;

const CRITIC_IN: usize = STATE_DIM + N_CONTROLLED_LANES;

pub struct DdpgAgent {
    pub(crate) actor: Mlp,
    pub(crate) critic: Mlp,
    target_actor: Mlp,
    target_critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    replay: ReplayMemory,
    noise: LaplaceNoise,
    config: AgentConfig,
    reward_kind: RewardKind,
    rng: ChaCha8Rng,
    quarantined: u64,
}

/// Losses reported by one update pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub mean_q: f64,
}

impl DdpgAgent {
    pub fn new(reward_kind: RewardKind, config: &AgentConfig, seed: u64) -> Result<Self, AgentError> {
        config.validate()?;
        let actor = Mlp::two_layer(
            STATE_DIM,
            config.hidden,
            N_CONTROLLED_LANES,
            Activation::Sigmoid,
            M_ACTIONS as f64,
            derive_seed(seed, 10, 0),
        );
        let critic = Mlp::two_layer(
            CRITIC_IN,
            config.hidden,
            1,
            Activation::Identity,
            1.0,
            derive_seed(seed, 10, 1),
        );
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        let actor_opt = Adam::new(AdamConfig::with_lr(config.actor_lr), &actor);
        let critic_opt = Adam::new(AdamConfig::with_lr(config.critic_lr), &critic);
        Ok(DdpgAgent {
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            replay: ReplayMemory::new(config.replay_capacity),
            noise: LaplaceNoise::new(config.noise_scale, config.noise_decay),
            config: config.clone(),
            reward_kind,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 11, 0)),
            quarantined: 0,
        })
    }

    /// Wraps pre-trained weights (e.g. a loaded checkpoint) for evaluation.
    pub fn from_actor(actor: Mlp, reward_kind: RewardKind, config: &AgentConfig) -> Result<Self, AgentError> {
        actor.ensure_shape(STATE_DIM, N_CONTROLLED_LANES).map_err(AgentError::Neural)?;
        let mut agent = DdpgAgent::new(reward_kind, config, 0)?;
        agent.target_actor = actor.clone();
        agent.actor = actor;
        Ok(agent)
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise.scale()
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    /// Direct parameter access, e.g. for warm starts or scripted tests.
    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn critic_mut(&mut self) -> &mut Mlp {
        &mut self.critic
    }

    /// Hard-copies the online networks into the targets.
    pub fn sync_targets(&mut self) {
        self.target_actor = self.actor.clone();
        self.target_critic = self.critic.clone();
    }

    /// True once target and online parameters are identical.
    pub fn targets_match_online(&self) -> bool {
        let eq = |a: &Mlp, b: &Mlp| {
            a.layers()
                .iter()
                .zip(b.layers())
                .all(|(x, y)| x.weights == y.weights && x.bias == y.bias)
        };
        eq(&self.target_actor, &self.actor) && eq(&self.target_critic, &self.critic)
    }

    pub fn quarantined_count(&self) -> u64 {
        self.quarantined
    }

    /// Policy head: actor output, optionally perturbed by Laplace noise,
    /// then mapped to the discrete action set. Exploring decays the noise.
    pub fn select_action(
        &mut self,
        state: &StateVector,
        explore: bool,
    ) -> Result<([f64; N_CONTROLLED_LANES], ActionVector), AgentError> {
        let out = self.actor.forward(&state.0).map_err(AgentError::Neural)?;
        let mut a_hat = [0.0; N_CONTROLLED_LANES];
        for (i, v) in out.iter().enumerate() {
            a_hat[i] = *v;
        }
        if explore {
            let noise = self.noise.sample_vec(&mut self.rng);
            for (v, x) in a_hat.iter_mut().zip(noise) {
                *v += x;
            }
            self.noise.decay_step();
        }
        let action = map_action_g(&a_hat)?;
        Ok((a_hat, action))
    }

    fn critic_input(state: &StateVector, action: &[f64; N_CONTROLLED_LANES]) -> [f64; CRITIC_IN] {
        let mut x = [0.0; CRITIC_IN];
        x[..STATE_DIM].copy_from_slice(&state.0);
        x[STATE_DIM..].copy_from_slice(action);
        x
    }

    /// TD target through the target networks; the next action is the target
    /// actor's output pushed through the same discrete mapping the plant
    /// applies.
    fn td_target(&self, t: &Transition) -> Result<f64, AgentError> {
        let a_next_cont = self.target_actor.forward(&t.next_state.0).map_err(AgentError::Neural)?;
        let mut raw = [0.0; N_CONTROLLED_LANES];
        for (i, v) in a_next_cont.iter().enumerate() {
            raw[i] = *v;
        }
        let a_next = map_action_g(&raw)?;
        let x = Self::critic_input(&t.next_state, &a_next.as_f64());
        let q_next = self.target_critic.forward(&x).map_err(AgentError::Neural)?[0];
        let bootstrap = if self.config.undiscounted_target { 1.0 } else { self.config.gamma };
        Ok(t.reward + bootstrap * q_next)
    }

    /// Mean-squared TD loss and its critic gradient over the batch.
    /// Transitions with non-finite targets are quarantined and logged.
    pub fn critic_loss_grads(&mut self, batch: &[Transition]) -> Result<(f64, Gradients), AgentError> {
        let mut grads = Gradients::zeros_like(&self.critic);
        let mut loss = 0.0;
        let mut traces = Vec::with_capacity(batch.len());
        for t in batch {
            let y = self.td_target(t)?;
            if !y.is_finite() {
                self.quarantined += 1;
                log::warn!("quarantined transition t={} with non-finite TD target", t.t);
                continue;
            }
            let x = Self::critic_input(&t.state, &t.action.as_f64());
            let trace = self.critic.forward_trace(&x).map_err(AgentError::Neural)?;
            let q = trace.output()[0];
            loss += (y - q) * (y - q);
            traces.push((trace, q, y));
        }
        if traces.is_empty() {
            return Ok((0.0, grads));
        }
        let n = traces.len() as f64;
        for (trace, q, y) in &traces {
            let upstream = [2.0 * (q - y) / n];
            let (g, _) = self.critic.backward(trace, &upstream).map_err(AgentError::Neural)?;
            grads.accumulate(&g);
        }
        Ok((loss / n, grads))
    }

    /// One descent step on the TD loss; returns the pre-step loss.
    pub fn critic_update(&mut self, batch: &[Transition]) -> Result<f64, AgentError> {
        let (loss, grads) = self.critic_loss_grads(batch)?;
        if self.critic_opt.step(&mut self.critic, &grads) == StepOutcome::SkippedNonFinite {
            log::warn!("critic update skipped: non-finite gradient");
        }
        Ok(loss)
    }

    /// Batch-mean Q at the actor's continuous output, and the gradient of
    /// the objective -mean(Q) with respect to the actor parameters via the
    /// chained deterministic policy gradient.
    pub fn actor_objective_grads(&self, batch: &[Transition]) -> Result<(f64, Gradients), AgentError> {
        let n = batch.len() as f64;
        let mut grads = Gradients::zeros_like(&self.actor);
        let mut mean_q = 0.0;
        for t in batch {
            let actor_trace = self.actor.forward_trace(&t.state.0).map_err(AgentError::Neural)?;
            let a_cont = actor_trace.output();
            let mut a = [0.0; N_CONTROLLED_LANES];
            for (i, v) in a_cont.iter().enumerate() {
                a[i] = *v;
            }
            let x = Self::critic_input(&t.state, &a);
            let critic_trace = self.critic.forward_trace(&x).map_err(AgentError::Neural)?;
            mean_q += critic_trace.output()[0];
            let (_, input_grad) =
                self.critic.backward(&critic_trace, &[1.0]).map_err(AgentError::Neural)?;
            // Minimizing -mean(Q): upstream is -dQ/da / N.
            let mut upstream = [0.0; N_CONTROLLED_LANES];
            for (i, u) in upstream.iter_mut().enumerate() {
                *u = -input_grad[STATE_DIM + i] / n;
            }
            let (g, _) = self.actor.backward(&actor_trace, &upstream).map_err(AgentError::Neural)?;
            grads.accumulate(&g);
        }
        Ok((mean_q / n, grads))
    }

    /// One ascent step on mean Q; returns the pre-step mean Q.
    pub fn actor_update(&mut self, batch: &[Transition]) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        let (mean_q, grads) = self.actor_objective_grads(batch)?;
        if self.actor_opt.step(&mut self.actor, &grads) == StepOutcome::SkippedNonFinite {
            log::warn!("actor update skipped: non-finite gradient");
        }
        Ok(mean_q)
    }

    pub fn push_transition(&mut self, t: Transition) {
        self.replay.push(t);
    }

    /// One in-loop learning step: sample, critic step, actor step, target
    /// blends. Returns `None` while the memory is smaller than a minibatch.
    pub fn update(&mut self) -> Result<Option<UpdateStats>, AgentError> {
        let Some(batch) = self.replay.sample_minibatch(self.config.minibatch, &mut self.rng) else {
            return Ok(None);
        };
        let critic_loss = self.critic_update(&batch)?;
        let mean_q = self.actor_update(&batch)?;
        soft_update(&mut self.target_actor, &self.actor, self.config.tau).map_err(AgentError::Neural)?;
        soft_update(&mut self.target_critic, &self.critic, self.config.tau).map_err(AgentError::Neural)?;
        Ok(Some(UpdateStats { critic_loss, mean_q }))
    }
}

/// Frozen DDPG policy.
pub struct DdpgController {
    actor: Mlp,
}

impl DdpgController {
    pub fn new(actor: Mlp) -> Result<Self, AgentError> {
        actor.ensure_shape(STATE_DIM, N_CONTROLLED_LANES).map_err(AgentError::Neural)?;
        Ok(DdpgController { actor })
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let actor = Mlp::load(path).map_err(AgentError::Neural)?;
        DdpgController::new(actor)
    }
}

impl Controller for DdpgController {
    fn kind(&self) -> &'static str {
        "ddpg"
    }

    fn action(&self, state: &StateVector) -> ActionVector {
        let out = self.actor.forward(&state.0).expect("actor shape verified at construction");
        let mut a_hat = [0.0; N_CONTROLLED_LANES];
        for (i, v) in out.iter().enumerate() {
            a_hat[i] = *v;
        }
        map_action_g(&a_hat).expect("sigmoid output is finite")
    }
}

impl Trainer for DdpgAgent {
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
            loop {
                if env.done() {
                    break;
                }
                let (_, action) = self.select_action(&state, true)?;
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
                let stats = self.update()?.unwrap_or_default();
                steps.push(TrainStepRecord {
                    episode,
                    step: step_idx,
                    reward_kind: self.reward_kind.label(),
                    reward: result.reward,
                    critic_loss: stats.critic_loss,
                    mean_q: stats.mean_q,
                    exploration: self.noise.scale(),
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
        Box::new(DdpgController { actor: self.actor.clone() })
    }

    fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, AgentError> {
        std::fs::create_dir_all(dir)?;
        let actor_path = dir.join(format!("{stem}_actor.wts"));
        let critic_path = dir.join(format!("{stem}_critic.wts"));
        self.actor.save(&actor_path).map_err(AgentError::Neural)?;
        self.critic.save(&critic_path).map_err(AgentError::Neural)?;
        Ok(vec![actor_path, critic_path])
    }
}
