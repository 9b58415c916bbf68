use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Env(#[from] dvsl_env::EnvError),

    #[error(transparent)]
    Neural(#[from] dvsl_neural::NeuralError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
