//! Plain-text configuration: `key = value` lines under `[section]`
//! headers. Missing keys keep their defaults, unknown keys are rejected
//! with the offending line number, and a serialize/parse round trip
//! reproduces the configuration exactly.
//!
//! Sections and keys:
//!
//! - `[soil]` k_c, k_phi, n, cohesion_c, friction_angle (rad; or
//!   friction_angle_deg on input), janosi_k, elastic_k, damping_r
//! - `[robot]` thigh_mass, thigh_length, shank_mass, shank_length,
//!   torso_mass, torso_length, hip_block_mass, hip_block_length,
//!   foot_mass, foot_length, foot_width, torque_limit, joint_damping
//! - `[env]` control_dt, physics_substeps, max_episode_steps, seed,
//!   initial_pose_noise
//! - `[reward]` w_forward, w_lateral, w_vertical, fall_penalty
//! - `[ddpg]` gamma, tau, batch_size, buffer_capacity, warmup_steps,
//!   noise_sigma, updates_per_step, actor_lr, critic_lr, hidden1,
//!   hidden2, seed
//! - `[output]` dir

use crate::biped::RobotParams;
use crate::ddpg::DdpgConfig;
use crate::env::{EnvConfig, RewardConfig};
use crate::soil::SoilParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config io: {0}")]
    Io(#[from] std::io::Error),
}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, msg: msg.into() }
}

/// Full run configuration with Table 1/Table 2 defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub soil: SoilParams,
    pub robot: RobotParams,
    pub env: EnvConfig,
    pub reward: RewardConfig,
    pub ddpg: DdpgConfig,
    pub output_dir: String,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            soil: SoilParams::default(),
            robot: RobotParams::default(),
            env: EnvConfig::default(),
            reward: RewardConfig::default(),
            ddpg: DdpgConfig::default(),
            output_dir: "out".into(),
        }
    }
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let mut section = String::new();
    let mut last_line_in_section: std::collections::BTreeMap<String, usize> =
        std::collections::BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, format!("malformed section header {line:?}")))?
                .trim();
            match name {
                "soil" | "robot" | "env" | "reward" | "ddpg" | "output" => {
                    section = name.to_string();
                }
                other => return Err(err(line_no, format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(err(line_no, format!("key {key:?} appears before any [section]")));
        }
        last_line_in_section.insert(section.clone(), line_no);

        let f = || -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|_| err(line_no, format!("{key}: not a number: {value:?}")))
        };
        let int = || -> Result<usize, ConfigError> {
            value
                .parse::<usize>()
                .map_err(|_| err(line_no, format!("{key}: not a non-negative integer: {value:?}")))
        };
        let int64 = || -> Result<u64, ConfigError> {
            value
                .parse::<u64>()
                .map_err(|_| err(line_no, format!("{key}: not a non-negative integer: {value:?}")))
        };

        match (section.as_str(), key) {
            ("soil", "k_c") => cfg.soil.k_c = f()?,
            ("soil", "k_phi") => cfg.soil.k_phi = f()?,
            ("soil", "n") => cfg.soil.n = f()?,
            ("soil", "cohesion_c") => cfg.soil.cohesion_c = f()?,
            ("soil", "friction_angle") => cfg.soil.friction_angle = f()?,
            ("soil", "friction_angle_deg") => cfg.soil.friction_angle = f()?.to_radians(),
            ("soil", "janosi_k") => cfg.soil.janosi_k = f()?,
            ("soil", "elastic_k") => cfg.soil.elastic_k = f()?,
            ("soil", "damping_r") => cfg.soil.damping_r = f()?,

            ("robot", "thigh_mass") => cfg.robot.thigh_mass = f()?,
            ("robot", "thigh_length") => cfg.robot.thigh_length = f()?,
            ("robot", "shank_mass") => cfg.robot.shank_mass = f()?,
            ("robot", "shank_length") => cfg.robot.shank_length = f()?,
            ("robot", "torso_mass") => cfg.robot.torso_mass = f()?,
            ("robot", "torso_length") => cfg.robot.torso_length = f()?,
            ("robot", "hip_block_mass") => cfg.robot.hip_block_mass = f()?,
            ("robot", "hip_block_length") => cfg.robot.hip_block_length = f()?,
            ("robot", "foot_mass") => cfg.robot.foot_mass = f()?,
            ("robot", "foot_length") => cfg.robot.foot_length = f()?,
            ("robot", "foot_width") => cfg.robot.foot_width = f()?,
            ("robot", "torque_limit") => cfg.robot.torque_limit = f()?,
            ("robot", "joint_damping") => cfg.robot.joint_damping = f()?,

            ("env", "control_dt") => cfg.env.control_dt = f()?,
            ("env", "physics_substeps") => cfg.env.physics_substeps = int()?,
            ("env", "max_episode_steps") => cfg.env.max_episode_steps = int()?,
            ("env", "seed") => cfg.env.seed = int64()?,
            ("env", "initial_pose_noise") => cfg.env.initial_pose_noise = f()?,

            ("reward", "w_forward") => cfg.reward.w_forward = f()?,
            ("reward", "w_lateral") => cfg.reward.w_lateral = f()?,
            ("reward", "w_vertical") => cfg.reward.w_vertical = f()?,
            ("reward", "fall_penalty") => cfg.reward.fall_penalty = f()?,

            ("ddpg", "gamma") => cfg.ddpg.gamma = f()?,
            ("ddpg", "tau") => cfg.ddpg.tau = f()?,
            ("ddpg", "batch_size") => cfg.ddpg.batch_size = int()?,
            ("ddpg", "buffer_capacity") => cfg.ddpg.buffer_capacity = int()?,
            ("ddpg", "warmup_steps") => cfg.ddpg.warmup_steps = int()?,
            ("ddpg", "noise_sigma") => cfg.ddpg.noise_sigma = f()?,
            ("ddpg", "updates_per_step") => cfg.ddpg.updates_per_step = int()?,
            ("ddpg", "actor_lr") => cfg.ddpg.actor_lr = f()?,
            ("ddpg", "critic_lr") => cfg.ddpg.critic_lr = f()?,
            ("ddpg", "hidden1") => cfg.ddpg.hidden.0 = int()?,
            ("ddpg", "hidden2") => cfg.ddpg.hidden.1 = int()?,
            ("ddpg", "seed") => cfg.ddpg.seed = int64()?,

            ("output", "dir") => cfg.output_dir = value.to_string(),

            (s, k) => return Err(err(line_no, format!("unknown key {k:?} in section [{s}]"))),
        }
    }

    let at = |s: &str| last_line_in_section.get(s).copied().unwrap_or(0);
    cfg.soil.validate().map_err(|e| err(at("soil"), e.to_string()))?;
    crate::biped::build_model(&cfg.robot).map_err(|e| err(at("robot"), e.to_string()))?;
    cfg.env.validate().map_err(|e| err(at("env"), e.to_string()))?;
    cfg.reward.validate().map_err(|e| err(at("reward"), e.to_string()))?;
    cfg.ddpg.validate().map_err(|e| err(at("ddpg"), e.to_string()))?;
    Ok(cfg)
}

/// Canonical text form; parsing it reproduces the config exactly.
pub fn write_config(cfg: &Config) -> String {
    let mut s = String::new();
    let kv = |s: &mut String, k: &str, v: f64| s.push_str(&format!("{k} = {v:?}\n"));

    s.push_str("[soil]\n");
    kv(&mut s, "k_c", cfg.soil.k_c);
    kv(&mut s, "k_phi", cfg.soil.k_phi);
    kv(&mut s, "n", cfg.soil.n);
    kv(&mut s, "cohesion_c", cfg.soil.cohesion_c);
    kv(&mut s, "friction_angle", cfg.soil.friction_angle);
    kv(&mut s, "janosi_k", cfg.soil.janosi_k);
    kv(&mut s, "elastic_k", cfg.soil.elastic_k);
    kv(&mut s, "damping_r", cfg.soil.damping_r);

    s.push_str("\n[robot]\n");
    kv(&mut s, "thigh_mass", cfg.robot.thigh_mass);
    kv(&mut s, "thigh_length", cfg.robot.thigh_length);
    kv(&mut s, "shank_mass", cfg.robot.shank_mass);
    kv(&mut s, "shank_length", cfg.robot.shank_length);
    kv(&mut s, "torso_mass", cfg.robot.torso_mass);
    kv(&mut s, "torso_length", cfg.robot.torso_length);
    kv(&mut s, "hip_block_mass", cfg.robot.hip_block_mass);
    kv(&mut s, "hip_block_length", cfg.robot.hip_block_length);
    kv(&mut s, "foot_mass", cfg.robot.foot_mass);
    kv(&mut s, "foot_length", cfg.robot.foot_length);
    kv(&mut s, "foot_width", cfg.robot.foot_width);
    kv(&mut s, "torque_limit", cfg.robot.torque_limit);
    kv(&mut s, "joint_damping", cfg.robot.joint_damping);

    s.push_str("\n[env]\n");
    kv(&mut s, "control_dt", cfg.env.control_dt);
    s.push_str(&format!("physics_substeps = {}\n", cfg.env.physics_substeps));
    s.push_str(&format!("max_episode_steps = {}\n", cfg.env.max_episode_steps));
    s.push_str(&format!("seed = {}\n", cfg.env.seed));
    kv(&mut s, "initial_pose_noise", cfg.env.initial_pose_noise);

    s.push_str("\n[reward]\n");
    kv(&mut s, "w_forward", cfg.reward.w_forward);
    kv(&mut s, "w_lateral", cfg.reward.w_lateral);
    kv(&mut s, "w_vertical", cfg.reward.w_vertical);
    kv(&mut s, "fall_penalty", cfg.reward.fall_penalty);

    s.push_str("\n[ddpg]\n");
    kv(&mut s, "gamma", cfg.ddpg.gamma);
    kv(&mut s, "tau", cfg.ddpg.tau);
    s.push_str(&format!("batch_size = {}\n", cfg.ddpg.batch_size));
    s.push_str(&format!("buffer_capacity = {}\n", cfg.ddpg.buffer_capacity));
    s.push_str(&format!("warmup_steps = {}\n", cfg.ddpg.warmup_steps));
    kv(&mut s, "noise_sigma", cfg.ddpg.noise_sigma);
    s.push_str(&format!("updates_per_step = {}\n", cfg.ddpg.updates_per_step));
    kv(&mut s, "actor_lr", cfg.ddpg.actor_lr);
    kv(&mut s, "critic_lr", cfg.ddpg.critic_lr);
    s.push_str(&format!("hidden1 = {}\n", cfg.ddpg.hidden.0));
    s.push_str(&format!("hidden2 = {}\n", cfg.ddpg.hidden.1));
    s.push_str(&format!("seed = {}\n", cfg.ddpg.seed));

    s.push_str("\n[output]\n");
    s.push_str(&format!("dir = {}\n", cfg.output_dir));
    s
}

pub fn load_config(path: &std::path::Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
