use super::{Action, EnvConfig, EnvError, Environment, Observation, RewardConfig, StepOutcome};
use crate::biped::{
    com, com_velocity, detect_fall, dynamics_step, foot_contact_samples, ExternalForce, LinkId,
    RobotModel, RobotState,
};
use crate::rng::Rng;
use crate::soil::{step_contact, BodyTag, ContactSample, SoilParams, TerrainGrid};

const GRID_SPACING: f64 = 0.01;
const GRID_EXTENT_X: f64 = 80.0;
const GRID_EXTENT_Y: f64 = 1.0;

/// Per-step diagnostics. Key set is frozen; these rows feed the CSV tracer.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnvInfo {
    pub fz_left: f64,
    pub fz_right: f64,
    pub fx_left: f64,
    pub fx_right: f64,
    pub com_x: f64,
    pub com_z: f64,
    pub reward_forward: f64,
    pub reward_lateral: f64,
    pub reward_vertical: f64,
    pub fell: bool,
}

/// The biped on deformable terrain as an episodic MDP.
pub struct BipedEnv {
    model: RobotModel,
    soil: SoilParams,
    cfg: EnvConfig,
    reward_cfg: RewardConfig,
    grid: TerrainGrid,
    state: RobotState,
    prev_action: [f64; 6],
    steps: usize,
    done: bool,
    started: bool,
    start_com_x: f64,
    last_info: EnvInfo,
    n_per_foot: usize,
    lateral_rows: usize,
}

impl BipedEnv {
    pub fn new(
        model: RobotModel,
        soil: SoilParams,
        cfg: EnvConfig,
        reward_cfg: RewardConfig,
    ) -> Result<Self, EnvError> {
        cfg.validate()?;
        reward_cfg.validate()?;
        soil.validate().map_err(|e| EnvError::Parameter(e.to_string()))?;
        let grid = TerrainGrid::new(GRID_EXTENT_X, GRID_EXTENT_Y, GRID_SPACING, 0.0)
            .map_err(|e| EnvError::Parameter(e.to_string()))?;
        // Sample pitch tracks the grid: one probe per cell along the sole,
        // replicated sideways so the full footprint area presses the soil.
        let n_per_foot = ((model.foot_length / GRID_SPACING).round() as usize).max(2);
        let lateral_rows = ((model.foot_width / GRID_SPACING).round() as usize).max(1);
        let state = RobotState::standing(&model, 0.0);
        let start_com_x = com(&model, &state.q)[0];
        Ok(BipedEnv {
            model,
            soil,
            cfg,
            reward_cfg,
            grid,
            state,
            prev_action: [0.0; 6],
            steps: 0,
            done: false,
            started: false,
            start_com_x,
            last_info: EnvInfo::default(),
            n_per_foot,
            lateral_rows,
        })
    }

    pub fn model(&self) -> &RobotModel {
        &self.model
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn grid(&self) -> &TerrainGrid {
        &self.grid
    }

    pub fn last_info(&self) -> &EnvInfo {
        &self.last_info
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Fresh terrain and a standing pose with uniform joint noise.
    pub fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = Rng::new(seed);
        self.grid = TerrainGrid::new(GRID_EXTENT_X, GRID_EXTENT_Y, GRID_SPACING, 0.0)
            .expect("static grid dimensions are valid");
        self.state = RobotState::standing(&self.model, 0.0);
        // Start a quarter cell off the grid lines; a perfectly aligned sole
        // puts every probe on a rounding tie and biases the centre of
        // pressure to one side.
        self.state.q[0] += GRID_SPACING / 4.0;
        let noise = self.cfg.initial_pose_noise;
        if noise > 0.0 {
            // Hips and ankles only: the knees start on their stop, where a
            // clamped two-sided draw would turn into a one-sided flexion
            // bias that plants both feet behind the centre of mass.
            for j in [0usize, 2, 3, 5] {
                let (lo, hi) = self.model.joint_limits[j];
                self.state.q[3 + j] =
                    (self.state.q[3 + j] + rng.uniform(-noise, noise)).clamp(lo, hi);
            }
        }
        self.prev_action = [0.0; 6];
        self.steps = 0;
        self.done = false;
        self.started = true;
        self.start_com_x = com(&self.model, &self.state.q)[0];
        self.last_info = EnvInfo::default();
        self.observe()
    }

    /// Assemble the fixed 22-entry observation.
    pub fn observe(&self) -> Observation {
        let c = com(&self.model, &self.state.q);
        let cv = com_velocity(&self.model, &self.state.q, &self.state.qd);
        let mut joint_angles = [0.0; 6];
        let mut joint_velocities = [0.0; 6];
        joint_angles.copy_from_slice(&self.state.q[3..9]);
        joint_velocities.copy_from_slice(&self.state.qd[3..9]);
        Observation {
            com_lateral: 0.0,
            com_vertical: c[1],
            joint_angles,
            joint_velocities,
            vel_forward: cv[0],
            vel_vertical: cv[1],
            prev_action: self.prev_action,
        }
    }

    /// Replicate each centerline probe across the sole width so the
    /// contact model sees the whole footprint.
    fn widened_samples(&self) -> Vec<ContactSample> {
        let center = foot_contact_samples(&self.model, &self.state, self.n_per_foot);
        if self.lateral_rows <= 1 {
            return center;
        }
        let rows = self.lateral_rows;
        let mut out = Vec::with_capacity(center.len() * rows);
        for s in &center {
            for k in 0..rows {
                let off = (k as f64 - (rows as f64 - 1.0) / 2.0) * GRID_SPACING;
                let mut dup = *s;
                dup.world_pos[1] += off;
                out.push(dup);
            }
        }
        out
    }

    /// Advance one control step: clamp the action to torques, run the
    /// physics substeps (contact then dynamics), then score the CoM motion.
    pub fn step(&mut self, action: &Action) -> Result<(Observation, f64, bool, EnvInfo), EnvError> {
        if self.done {
            return Err(EnvError::Usage("step called on a finished episode".into()));
        }
        if !self.started {
            return Err(EnvError::Usage("step called before reset".into()));
        }
        let u = action.clamped().u;
        let mut torques = [0.0; 6];
        for j in 0..6 {
            torques[j] = u[j] * self.model.torque_limit;
        }

        let com_before = com(&self.model, &self.state.q);
        let dt = self.cfg.physics_dt();
        let mut fz = [0.0f64; 2];
        let mut fx = [0.0f64; 2];
        let mut blew_up = false;

        for _ in 0..self.cfg.physics_substeps {
            let samples = self.widened_samples();
            let forces = step_contact(&mut self.grid, &self.soil, &samples, dt)
                .map_err(|e| EnvError::Parameter(e.to_string()))?;

            let mut external = Vec::new();
            for (s, f) in samples.iter().zip(forces.iter()) {
                let side = match s.owner {
                    BodyTag::LeftFoot => 0,
                    BodyTag::RightFoot => 1,
                    BodyTag::Other => continue,
                };
                fz[side] += f[2];
                fx[side] += f[0];
                if f[0] != 0.0 || f[2] != 0.0 {
                    external.push(ExternalForce {
                        body: if side == 0 { LinkId::FootL } else { LinkId::FootR },
                        point: [s.world_pos[0], s.world_pos[2]],
                        force: [f[0], f[2]],
                    });
                }
            }

            match dynamics_step(&self.model, &self.state, &torques, &external, dt) {
                Ok(next) => self.state = next,
                Err(_) => {
                    // Non-finite dynamics terminate the episode as a fall.
                    blew_up = true;
                    break;
                }
            }
        }

        let com_after = com(&self.model, &self.state.q);
        let dx = com_after[0] - com_before[0];
        let dy = 0.0;
        let dz = com_after[1] - com_before[1];

        let fell = blew_up || detect_fall(&self.model, &self.state);
        self.steps += 1;
        self.done = fell || self.steps >= self.cfg.max_episode_steps;

        let reward_forward = self.reward_cfg.w_forward * dx;
        let reward_lateral = 0.0 - self.reward_cfg.w_lateral * f64::abs(dy);
        let reward_vertical = 0.0 - self.reward_cfg.w_vertical * f64::abs(dz);
        let mut reward = reward_forward + reward_lateral + reward_vertical;
        if fell {
            reward -= self.reward_cfg.fall_penalty;
        }

        let substeps = self.cfg.physics_substeps as f64;
        self.last_info = EnvInfo {
            fz_left: fz[0] / substeps,
            fz_right: fz[1] / substeps,
            fx_left: fx[0] / substeps,
            fx_right: fx[1] / substeps,
            com_x: com_after[0],
            com_z: com_after[1],
            reward_forward,
            reward_lateral,
            reward_vertical,
            fell,
        };
        self.prev_action = u;
        Ok((self.observe(), reward, self.done, self.last_info))
    }
}

impl Environment for BipedEnv {
    fn obs_dim(&self) -> usize {
        Observation::DIM
    }

    fn action_dim(&self) -> usize {
        6
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        BipedEnv::reset(self, seed).to_vec()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome, EnvError> {
        let mut u = [0.0; 6];
        for (dst, src) in u.iter_mut().zip(action.iter()) {
            *dst = *src;
        }
        let (obs, reward, done, _) = BipedEnv::step(self, &Action { u })?;
        Ok(StepOutcome { observation: obs.to_vec(), reward, done })
    }

    fn forward_progress(&self) -> f64 {
        self.last_info.com_x - self.start_com_x
    }
}
