//! Minimal feedforward stack: MLP forward/backward, Adam, Polyak updates
//! and a plain-text checkpoint format. Everything is `f64` and exactly
//! reproducible from a seed.

mod checkpoint;
mod mlp;

pub use checkpoint::{load_mlp, read_mlp, save_mlp, write_mlp};
pub use mlp::{adam_step, soft_update, Activation, AdamState, Gradients, Mlp};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("invalid network parameter: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(String),
}
