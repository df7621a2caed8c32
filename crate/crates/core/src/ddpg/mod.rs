//! Deep deterministic policy gradient: four networks, a replay buffer,
//! Gaussian exploration and soft target updates.

mod agent;
mod buffer;
mod train;

pub use agent::{Agent, DdpgConfig};
pub use buffer::{ReplayBuffer, Transition};
pub use train::{evaluate, train, EpisodeRecord, TrainingMetrics, METRICS_HEADER};

use crate::env::EnvError;
use crate::nn::NnError;

#[derive(Debug, thiserror::Error)]
pub enum DdpgError {
    #[error("invalid training parameter: {0}")]
    Parameter(String),
    #[error("replay buffer not ready: {0}")]
    NotReady(String),
    #[error("training failure: {0}")]
    Training(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Nn(#[from] NnError),
}
