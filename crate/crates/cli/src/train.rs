//! Training front end: dispatches to the registry trainer, persists the
//! checkpoint, logs and the exact configuration used.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use dvsl_agents::{
    episode_log_header, episode_log_row, train_log_header, train_log_row, TrainOutcome, TrainRun,
};
use dvsl_env::RewardKind;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub label: String,
    pub agent: String,
    pub reward: String,
    pub episodes: usize,
    pub master_seed: u64,
    pub checkpoints: Vec<PathBuf>,
    pub first_episode_reward: Option<f64>,
    pub last_episode_reward: Option<f64>,
}

pub fn train(
    config: &ExperimentConfig,
    agent_kind: &str,
    reward: RewardKind,
    episodes: usize,
    master_seed: u64,
    out_dir: &Path,
    label: Option<&str>,
) -> Result<TrainSummary> {
    let entry = dvsl_agents::find(agent_kind).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown agent '{agent_kind}'; available: {}",
            dvsl_agents::names().join(", ")
        ))
    })?;
    let mut trainer = entry.make_trainer(reward, &config.agent, master_seed).map_err(|e| {
        // Invalid agent/reward pairs are usage errors listing the valid ones.
        match e {
            dvsl_agents::AgentError::Config(m) => CliError::Usage(m),
            other => other.into(),
        }
    })?;
    let label = label
        .map(str::to_string)
        .unwrap_or_else(|| format!("{agent_kind}-{}", reward.label()));

    let outcome = trainer
        .train(&config.scenario, &TrainRun { episodes, master_seed })
        .map_err(CliError::from)?;

    std::fs::create_dir_all(out_dir)?;
    write_logs(out_dir, &label, &outcome)?;
    config.save(&out_dir.join(format!("{label}_config.toml")))?;
    let checkpoints = trainer.save(out_dir, &label).map_err(CliError::from)?;

    let summary = TrainSummary {
        label: label.clone(),
        agent: agent_kind.to_string(),
        reward: reward.label().to_string(),
        episodes,
        master_seed,
        checkpoints,
        first_episode_reward: outcome.episodes.first().map(|e| e.accumulated_reward),
        last_episode_reward: outcome.episodes.last().map(|e| e.accumulated_reward),
    };
    std::fs::write(
        out_dir.join(format!("{label}_train_summary.json")),
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?,
    )?;
    Ok(summary)
}

fn write_logs(out_dir: &Path, label: &str, outcome: &TrainOutcome) -> Result<()> {
    let mut log = String::from(train_log_header());
    log.push('\n');
    for r in &outcome.steps {
        let _ = writeln!(log, "{}", train_log_row(r));
    }
    std::fs::write(out_dir.join(format!("{label}_training_log.csv")), log)?;

    let mut epi = String::from(episode_log_header());
    epi.push('\n');
    for r in &outcome.episodes {
        let _ = writeln!(epi, "{}", episode_log_row(r));
    }
    std::fs::write(out_dir.join(format!("{label}_training_episodes.csv")), epi)?;
    Ok(())
}
