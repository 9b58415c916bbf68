//! Tabular Q-learning baseline: 125 discretized occupancy states, 6 shared
//! speed-limit actions broadcast to every lane.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dvsl_env::{ActionVector, RewardKind, StateVector, TrafficEnv, M_ACTIONS};
use dvsl_sim::Scenario;

use crate::config::{derive_seed, AgentConfig};
use crate::controller::{Controller, TrainOutcome, TrainRun, Trainer};
use crate::logs::{EpisodeRecord, TrainStepRecord};
use crate::AgentError;

pub const N_DISCRETE_STATES: usize = 125;

/// Mixed-radix index over 5 occupancy bins per section: upstream * 25 +
/// merge * 5 + ramp.
pub fn discretize_state(s: &StateVector, edges: &[f64; 4]) -> usize {
    let (up, mrg, ramp) = s.section_means();
    let bin = |v: f64| edges.iter().filter(|&&e| v >= e).count();
    bin(up) * 25 + bin(mrg) * 5 + bin(ramp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<[f64; M_ACTIONS]>,
}

impl QTable {
    pub fn zeros() -> Self {
        QTable { values: vec![[0.0; M_ACTIONS]; N_DISCRETE_STATES] }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s][a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s][a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64; M_ACTIONS] {
        &self.values[s]
    }

    /// Greedy action, lowest index on ties.
    pub fn argmax(&self, s: usize) -> usize {
        let row = &self.values[s];
        let mut best = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    /// Plain 125x6 CSV, no header.
    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let mut out = String::new();
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::with_capacity(N_DISCRETE_STATES);
        for (i, line) in text.lines().enumerate() {
            let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let row = row.map_err(|e| {
                AgentError::Checkpoint(format!("q-table row {i} does not parse: {e}"))
            })?;
            if row.len() != M_ACTIONS {
                return Err(AgentError::Checkpoint(format!(
                    "q-table row {i} has {} columns, expected {M_ACTIONS}",
                    row.len()
                )));
            }
            let mut arr = [0.0; M_ACTIONS];
            arr.copy_from_slice(&row);
            values.push(arr);
        }
        if values.len() != N_DISCRETE_STATES {
            return Err(AgentError::Checkpoint(format!(
                "q-table has {} rows, expected {N_DISCRETE_STATES}",
                values.len()
            )));
        }
        Ok(QTable { values })
    }
}

/// Classical tabular update; exactly one cell changes.
pub fn q_learning_step(
    table: &mut QTable,
    s: usize,
    a: usize,
    reward: f64,
    s_next: usize,
    alpha: f64,
    gamma: f64,
) {
    let max_next = *table
        .row(s_next)
        .iter()
        .max_by(|x, y| x.partial_cmp(y).unwrap())
        .expect("row is nonempty");
    let q = table.get(s, a);
    table.set(s, a, q + alpha * (reward + gamma * max_next - q));
}

pub struct QLearningAgent {
    table: QTable,
    config: AgentConfig,
    reward_kind: RewardKind,
    rng: ChaCha8Rng,
    epsilon_steps: u32,
}

impl QLearningAgent {
    pub fn new(reward_kind: RewardKind, config: &AgentConfig, seed: u64) -> Result<Self, AgentError> {
        config.validate()?;
        Ok(QLearningAgent {
            table: QTable::zeros(),
            config: config.clone(),
            reward_kind,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, 12, 0)),
            epsilon_steps: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        (self.config.q_epsilon_start * self.config.epsilon_decay.powi(self.epsilon_steps as i32))
            .max(self.config.epsilon_min)
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    fn behavior_action(&mut self, s_idx: usize) -> usize {
        let eps = self.epsilon();
        self.epsilon_steps += 1;
        if self.rng.random_range(0.0..1.0) < eps {
            self.rng.random_range(0..M_ACTIONS)
        } else {
            self.table.argmax(s_idx)
        }
    }
}

/// Frozen greedy table policy; the one shared limit is broadcast laneswide.
pub struct QTableController {
    table: QTable,
    edges: [f64; 4],
}

impl QTableController {
    pub fn new(table: QTable, edges: [f64; 4]) -> Self {
        QTableController { table, edges }
    }

    pub fn load(path: &Path, edges: [f64; 4]) -> Result<Self, AgentError> {
        Ok(QTableController { table: QTable::load(path)?, edges })
    }
}

impl Controller for QTableController {
    fn kind(&self) -> &'static str {
        "qlearning"
    }

    fn action(&self, state: &StateVector) -> ActionVector {
        let s_idx = discretize_state(state, &self.edges);
        ActionVector::uniform(self.table.argmax(s_idx))
    }
}

impl Trainer for QLearningAgent {
    fn reward_kind(&self) -> RewardKind {
        self.reward_kind
    }

    fn train(&mut self, scenario: &Scenario, run: &TrainRun) -> Result<TrainOutcome, AgentError> {
        let edges = self.config.bin_edges;
        let mut steps = Vec::new();
        let mut episodes = Vec::new();
        for episode in 0..run.episodes {
            let demand_seed = derive_seed(run.master_seed, 0, episode as u64);
            let mut env = TrafficEnv::new(scenario, self.reward_kind, demand_seed)?;
            let mut state = env.state();
            let mut step_idx = 0usize;
            let mut theta_total = 0.0;
            while !env.done() {
                let s_idx = discretize_state(&state, &edges);
                let a_idx = self.behavior_action(s_idx);
                let action = ActionVector::uniform(a_idx);
                let result = match env.step(&action) {
                    Ok(r) => r,
                    Err(e) => {
                        log::warn!("episode {episode} aborted at step {step_idx}: {e}");
                        break;
                    }
                };
                theta_total += result.metrics.theta as f64;
                let s_next_idx = discretize_state(&result.state, &edges);
                q_learning_step(
                    &mut self.table,
                    s_idx,
                    a_idx,
                    result.reward,
                    s_next_idx,
                    self.config.q_alpha,
                    self.config.gamma,
                );
                steps.push(TrainStepRecord {
                    episode,
                    step: step_idx,
                    reward_kind: self.reward_kind.label(),
                    reward: result.reward,
                    critic_loss: 0.0,
                    mean_q: self.table.get(s_idx, a_idx),
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
        Box::new(QTableController::new(self.table.clone(), self.config.bin_edges))
    }

    fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, AgentError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}_qtable.csv"));
        self.table.save(&path)?;
        Ok(vec![path])
    }
}
