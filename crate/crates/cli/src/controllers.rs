//! Controller selection arguments: `kind[:label][=checkpoint]`, resolved
//! against the registry.

use std::path::PathBuf;

use dvsl_agents::{AgentConfig, Controller};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerArg {
    pub kind: String,
    pub label: String,
    pub checkpoint: Option<PathBuf>,
}

impl ControllerArg {
    /// Parses `kind[:label][=path]`, e.g. `novsl`,
    /// `qlearning=out/q_qtable.csv`, `ddpg:ddpg-r3=out/ddpg-r3_actor.wts`.
    pub fn parse(text: &str) -> Result<Self> {
        let (head, path) = match text.split_once('=') {
            Some((h, p)) if !p.is_empty() => (h, Some(PathBuf::from(p))),
            Some((_, _)) => {
                return Err(CliError::Usage(format!("empty checkpoint path in '{text}'")))
            }
            None => (text, None),
        };
        let (kind, label) = match head.split_once(':') {
            Some((k, l)) if !l.is_empty() => (k, l),
            Some((_, _)) => return Err(CliError::Usage(format!("empty label in '{text}'"))),
            None => (head, head),
        };
        if kind.is_empty() {
            return Err(CliError::Usage(format!("empty controller kind in '{text}'")));
        }
        Ok(ControllerArg {
            kind: kind.to_string(),
            label: label.to_string(),
            checkpoint: path,
        })
    }

    pub fn load(&self, agent_config: &AgentConfig) -> Result<Box<dyn Controller>> {
        let entry = dvsl_agents::find(&self.kind).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown controller '{}'; available: {}",
                self.kind,
                dvsl_agents::names().join(", ")
            ))
        })?;
        if entry.needs_checkpoint && self.checkpoint.is_none() {
            return Err(CliError::Usage(format!(
                "controller '{}' needs a checkpoint: use {}=<path>",
                self.label, self.kind
            )));
        }
        entry
            .load(self.checkpoint.as_deref(), agent_config)
            .map_err(|e| CliError::Config(format!("loading '{}': {e}", self.label)))
    }
}

/// Rejects duplicate labels so report rows stay unambiguous.
pub fn check_unique_labels(args: &[ControllerArg]) -> Result<()> {
    for (i, a) in args.iter().enumerate() {
        if args[i + 1..].iter().any(|b| b.label == a.label) {
            return Err(CliError::Usage(format!("duplicate controller label '{}'", a.label)));
        }
    }
    Ok(())
}
