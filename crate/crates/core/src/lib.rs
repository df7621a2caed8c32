//! Desk-scale simulator of a planar flat-foot biped walking on deformable
//! Bekker-Wong terrain, with a from-scratch DDPG training stack.
//!
//! The crate is organised around five subsystems:
//!
//! - [`soil`] — sparse deformable terrain and the nodal contact force law
//! - [`biped`] — planar 7-link robot: kinematics, dynamics, gait reference
//! - [`env`] — the episodic MDP wrapper plus a 1-D point-mass task
//! - [`nn`] — minimal MLP with reverse-mode gradients and Adam
//! - [`ddpg`] — replay buffer, actor-critic updates, training loop
//!
//! [`config`], [`trace`] and [`cli`] form the operational shell: plain-text
//! config files, CSV episode traces and the `terrawalk` binary.

pub mod biped;
pub mod cli;
pub mod config;
pub mod ddpg;
pub mod env;
pub mod nn;
pub mod rng;
pub mod soil;
pub mod trace;
