//! Planar (sagittal-plane) 7-link flat-foot biped.
//!
//! Generalized coordinates `q = [base_x, base_z, pitch, hip_l, knee_l,
//! ankle_l, hip_r, knee_r, ankle_r]`. Angles are counterclockwise in the
//! x-z plane (x forward, z up): a leg link at joint angle zero hangs
//! straight down, positive hip swings the knee forward, positive knee
//! flexes the shank backward, positive ankle pitches the toe up, and the
//! torso rides the pitch coordinate with its top at `-sin(pitch)` forward.

mod dynamics;
mod gait;
mod kinematics;
mod model;

pub use dynamics::{
    detect_fall, dynamics_step, dynamics_step_with, mechanical_energy, ExternalForce, SimOptions,
};
pub use gait::{cycloid_reference, leg_ik, GaitReference};
pub use kinematics::{
    com, com_velocity, foot_contact_samples, forward_kinematics, FootPoints, Kinematics, LinkPose,
};
pub use model::{build_model, total_mass, LinkId, LinkParams, RobotModel, RobotParams, RobotState};

/// Number of generalized coordinates: planar base plus six joints.
pub const NQ: usize = 9;

/// Errors from model construction, kinematics and integration.
#[derive(Debug, thiserror::Error)]
pub enum BipedError {
    #[error("invalid robot parameter: {0}")]
    Parameter(String),
    #[error("ankle target out of reach: {0}")]
    Unreachable(String),
    #[error("integration failure: {0}")]
    Integration(String),
}
