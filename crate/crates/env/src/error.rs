use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("unknown reward kind '{0}', expected one of r1, r2, r3, r4")]
    UnknownRewardKind(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Sim(#[from] dvsl_sim::SimError),
}
