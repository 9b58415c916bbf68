use thiserror::Error;

/// CLI failures, bucketed by exit code: usage 2, config 3, runtime 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<dvsl_sim::SimError> for CliError {
    fn from(e: dvsl_sim::SimError) -> Self {
        match e {
            dvsl_sim::SimError::Config(m) => CliError::Config(m),
            dvsl_sim::SimError::Parse(e) => CliError::Config(e.to_string()),
            dvsl_sim::SimError::Io(e) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<dvsl_env::EnvError> for CliError {
    fn from(e: dvsl_env::EnvError) -> Self {
        match e {
            dvsl_env::EnvError::UnknownRewardKind(k) => {
                CliError::Usage(format!("unknown reward kind '{k}'"))
            }
            dvsl_env::EnvError::Sim(e) => e.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<dvsl_agents::AgentError> for CliError {
    fn from(e: dvsl_agents::AgentError) -> Self {
        match e {
            dvsl_agents::AgentError::Config(m) => CliError::Config(m),
            dvsl_agents::AgentError::Checkpoint(m) => CliError::Config(m),
            dvsl_agents::AgentError::Env(e) => e.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
