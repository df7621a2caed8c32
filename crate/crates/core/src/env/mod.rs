//! Episodic environments: the deformable-terrain biped and a 1-D
//! point-mass task used as a learning-sanity oracle.

mod biped_env;
mod point_mass;

pub use biped_env::{BipedEnv, EnvInfo};
pub use point_mass::PointMassEnv;

use crate::biped::BipedError;

/// Errors from environment construction and stepping.
#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("invalid environment parameter: {0}")]
    Parameter(String),
    #[error("environment misuse: {0}")]
    Usage(String),
    #[error(transparent)]
    Biped(#[from] BipedError),
}

/// Torque-fraction action, one entry per actuated joint, clamped to the
/// unit box before use.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub u: [f64; 6],
}

impl Action {
    pub fn clamped(&self) -> Action {
        let mut u = self.u;
        for v in &mut u {
            *v = v.clamp(-1.0, 1.0);
        }
        Action { u }
    }
}

/// Observation of the biped environment. Fixed 22-entry layout:
///
/// | index | entry                       |
/// |-------|-----------------------------|
/// | 0     | CoM lateral (always 0 here) |
/// | 1     | CoM vertical                |
/// | 2-7   | joint angles                |
/// | 8-13  | joint velocities            |
/// | 14    | CoM forward velocity        |
/// | 15    | CoM vertical velocity       |
/// | 16-21 | previous action             |
///
/// Joints order: hip_l, knee_l, ankle_l, hip_r, knee_r, ankle_r.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub com_lateral: f64,
    pub com_vertical: f64,
    pub joint_angles: [f64; 6],
    pub joint_velocities: [f64; 6],
    pub vel_forward: f64,
    pub vel_vertical: f64,
    pub prev_action: [f64; 6],
}

impl Observation {
    pub const DIM: usize = 22;

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::DIM);
        v.push(self.com_lateral);
        v.push(self.com_vertical);
        v.extend_from_slice(&self.joint_angles);
        v.extend_from_slice(&self.joint_velocities);
        v.push(self.vel_forward);
        v.push(self.vel_vertical);
        v.extend_from_slice(&self.prev_action);
        v
    }
}

/// Reward shaping weights: forward progress pays, lateral and vertical
/// motion cost, falling costs a lump sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig {
    pub w_forward: f64,
    pub w_lateral: f64,
    pub w_vertical: f64,
    pub fall_penalty: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { w_forward: 1.0, w_lateral: 0.5, w_vertical: 0.5, fall_penalty: 10.0 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.w_forward >= 0.0
            && self.w_lateral >= 0.0
            && self.w_vertical >= 0.0
            && self.fall_penalty >= 0.0)
        {
            return Err(EnvError::Parameter(format!("reward weights must be >= 0: {self:?}")));
        }
        Ok(())
    }
}

/// Episode timing and reset configuration. The physics step is
/// `control_dt / physics_substeps`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub control_dt: f64,
    pub physics_substeps: usize,
    pub max_episode_steps: usize,
    pub seed: u64,
    pub initial_pose_noise: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            control_dt: 0.02,
            physics_substeps: 20,
            max_episode_steps: 1000,
            seed: 0,
            initial_pose_noise: 0.01,
        }
    }
}

impl EnvConfig {
    pub fn physics_dt(&self) -> f64 {
        self.control_dt / self.physics_substeps as f64
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.control_dt > 0.0) {
            return Err(EnvError::Parameter(format!("control_dt must be > 0, got {}", self.control_dt)));
        }
        if self.physics_substeps == 0 {
            return Err(EnvError::Parameter("physics_substeps must be >= 1".into()));
        }
        if self.max_episode_steps == 0 {
            return Err(EnvError::Parameter("max_episode_steps must be > 0".into()));
        }
        if !(self.initial_pose_noise >= 0.0) {
            return Err(EnvError::Parameter(format!(
                "initial_pose_noise must be >= 0, got {}",
                self.initial_pose_noise
            )));
        }
        if self.physics_dt() > 5e-3 {
            return Err(EnvError::Parameter(format!(
                "physics step {} exceeds the integrator ceiling of 5e-3 s",
                self.physics_dt()
            )));
        }
        Ok(())
    }
}

/// Step outcome common to all environments.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

/// Common episodic interface consumed by the training loop.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, EnvError>;
    /// Forward displacement accumulated this episode, for run metrics.
    fn forward_progress(&self) -> f64 {
        0.0
    }
}
