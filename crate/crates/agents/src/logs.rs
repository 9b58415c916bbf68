//! Training log records and their CSV encoding.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct TrainStepRecord {
    pub episode: usize,
    pub step: usize,
    pub reward_kind: &'static str,
    pub reward: f64,
    pub critic_loss: f64,
    pub mean_q: f64,
    /// Exploration scale: Laplace b for the actor-critic, epsilon otherwise.
    pub exploration: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub accumulated_reward: f64,
    pub att: f64,
    pub completed: u64,
    pub theta_total: f64,
}

pub fn train_log_header() -> &'static str {
    "episode,step,reward_kind,r,critic_loss,mean_q,b"
}

pub fn train_log_row(r: &TrainStepRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.episode, r.step, r.reward_kind, r.reward, r.critic_loss, r.mean_q, r.exploration
    )
}

pub fn episode_log_header() -> &'static str {
    "episode,accumulated_reward,att,completed,theta_total"
}

pub fn episode_log_row(r: &EpisodeRecord) -> String {
    format!(
        "{},{},{},{},{}",
        r.episode, r.accumulated_reward, r.att, r.completed, r.theta_total
    )
}
