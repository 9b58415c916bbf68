//! Experiment configuration: a scenario plus agent hyperparameters, with the
//! two built-in presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use dvsl_agents::AgentConfig;
use dvsl_sim::Scenario;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// 2-hour episodes, 30 training episodes, 10 evaluation episodes.
    Desk,
    /// 18-hour episodes, 150 training episodes, 50 evaluation episodes.
    Paper,
}

impl Preset {
    pub fn scenario(self) -> Scenario {
        match self {
            Preset::Desk => Scenario::desk(),
            Preset::Paper => Scenario::paper(),
        }
    }

    pub fn default_train_episodes(self) -> usize {
        match self {
            Preset::Desk => 30,
            Preset::Paper => 150,
        }
    }

    pub fn default_eval_episodes(self) -> usize {
        match self {
            Preset::Desk => 10,
            Preset::Paper => 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub agent: AgentConfig,
}

impl ExperimentConfig {
    pub fn from_preset(preset: Preset) -> Self {
        ExperimentConfig { scenario: preset.scenario(), agent: AgentConfig::default() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.scenario.validate()?;
        cfg.agent.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("serialize config: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Preset when no --config is given, file otherwise; --preset with
    /// --config is rejected to keep runs unambiguous.
    pub fn resolve(config: Option<&Path>, preset: Option<Preset>) -> Result<Self> {
        match (config, preset) {
            (Some(_), Some(_)) => {
                Err(CliError::Usage("--config and --preset are mutually exclusive".into()))
            }
            (Some(path), None) => ExperimentConfig::load(path),
            (None, preset) => Ok(ExperimentConfig::from_preset(preset.unwrap_or(Preset::Desk))),
        }
    }
}
