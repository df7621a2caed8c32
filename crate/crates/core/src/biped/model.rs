use super::{BipedError, NQ};

/// One rigid link: mass, length, CoM offset from the proximal joint along
/// the link, and planar rotational inertia about the CoM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub mass: f64,
    pub length: f64,
    pub com_offset: f64,
    pub inertia: f64,
}

impl LinkParams {
    /// Uniform slender rod: CoM at mid-link, inertia `m l^2 / 12`.
    pub fn rod(mass: f64, length: f64) -> Self {
        LinkParams { mass, length, com_offset: length / 2.0, inertia: mass * length * length / 12.0 }
    }

    fn validate(&self, name: &str) -> Result<(), BipedError> {
        if !(self.mass > 0.0) {
            return Err(BipedError::Parameter(format!("{name} mass must be > 0, got {}", self.mass)));
        }
        if !(self.length >= 0.0) {
            return Err(BipedError::Parameter(format!(
                "{name} length must be >= 0, got {}",
                self.length
            )));
        }
        if !(self.com_offset >= 0.0 && self.com_offset <= self.length) {
            return Err(BipedError::Parameter(format!(
                "{name} com_offset must lie on the link, got {}",
                self.com_offset
            )));
        }
        if !(self.inertia >= 0.0) {
            return Err(BipedError::Parameter(format!(
                "{name} inertia must be >= 0, got {}",
                self.inertia
            )));
        }
        Ok(())
    }
}

/// Identifies a link for external force application and kinematics lookup.
/// The discriminant doubles as the index into per-link tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkId {
    Torso = 0,
    ThighL = 1,
    ShankL = 2,
    FootL = 3,
    ThighR = 4,
    ShankR = 5,
    FootR = 6,
}

impl LinkId {
    pub const ALL: [LinkId; 7] = [
        LinkId::Torso,
        LinkId::ThighL,
        LinkId::ShankL,
        LinkId::FootL,
        LinkId::ThighR,
        LinkId::ShankR,
        LinkId::FootR,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Raw parameter table as it appears in config files. The hip block is a
/// separate entry here and gets lumped into the torso link at build time
/// (the planar model has no lateral hip articulation).
#[derive(Debug, Clone, PartialEq)]
pub struct RobotParams {
    pub thigh_mass: f64,
    pub thigh_length: f64,
    pub shank_mass: f64,
    pub shank_length: f64,
    pub torso_mass: f64,
    pub torso_length: f64,
    pub hip_block_mass: f64,
    pub hip_block_length: f64,
    pub foot_mass: f64,
    pub foot_length: f64,
    pub foot_width: f64,
    pub torque_limit: f64,
    pub joint_damping: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        RobotParams {
            thigh_mass: 2.5,
            thigh_length: 0.23,
            shank_mass: 2.5,
            shank_length: 0.23,
            torso_mass: 4.0,
            torso_length: 0.23,
            hip_block_mass: 1.5,
            hip_block_length: 0.13,
            foot_mass: 1.0,
            foot_length: 0.09,
            foot_width: 0.05,
            torque_limit: 30.0,
            joint_damping: 2.0,
        }
    }
}

/// Assembled planar model. Left and right legs share parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    /// Torso link with the hip block lumped in.
    pub torso: LinkParams,
    pub thigh: LinkParams,
    pub shank: LinkParams,
    /// Foot link; its `com_offset` is measured from the ankle, which sits
    /// at the foot's midpoint.
    pub foot: LinkParams,
    pub foot_length: f64,
    pub foot_width: f64,
    /// Lateral offset of each foot centerline from the sagittal plane,
    /// used for terrain bookkeeping only.
    pub stance_half_width: f64,
    pub torque_limit: f64,
    /// Viscous joint friction (N·m·s/rad), the gearbox drag every real
    /// actuator has. Applied per joint as `-b * qd`.
    pub joint_damping: f64,
    /// (min, max) per joint: hip_l, knee_l, ankle_l, hip_r, knee_r, ankle_r.
    pub joint_limits: [(f64, f64); 6],
}

/// Build the model from a parameter table. The hip block mass is merged
/// into the torso (combined CoM and parallel-axis inertia, block CoM at
/// the hip joint); everything else is a uniform rod.
pub fn build_model(params: &RobotParams) -> Result<RobotModel, BipedError> {
    for (name, m, l) in [
        ("thigh", params.thigh_mass, params.thigh_length),
        ("shank", params.shank_mass, params.shank_length),
        ("torso", params.torso_mass, params.torso_length),
        ("hip block", params.hip_block_mass, params.hip_block_length),
        ("foot", params.foot_mass, params.foot_length),
    ] {
        if !(m > 0.0) {
            return Err(BipedError::Parameter(format!("{name} mass must be > 0, got {m}")));
        }
        if !(l > 0.0) {
            return Err(BipedError::Parameter(format!("{name} length must be > 0, got {l}")));
        }
    }
    if !(params.foot_width > 0.0) {
        return Err(BipedError::Parameter(format!(
            "foot width must be > 0, got {}",
            params.foot_width
        )));
    }
    if !(params.torque_limit > 0.0) {
        return Err(BipedError::Parameter(format!(
            "torque limit must be > 0, got {}",
            params.torque_limit
        )));
    }
    if !(params.joint_damping >= 0.0) {
        return Err(BipedError::Parameter(format!(
            "joint damping must be >= 0, got {}",
            params.joint_damping
        )));
    }

    let torso_rod = LinkParams::rod(params.torso_mass, params.torso_length);
    let m_blk = params.hip_block_mass;
    let i_blk = m_blk * params.hip_block_length * params.hip_block_length / 12.0;
    let m_total = torso_rod.mass + m_blk;
    // Block CoM at the hip joint (offset 0), rod CoM at mid-link.
    let com = torso_rod.mass * torso_rod.com_offset / m_total;
    let inertia = torso_rod.inertia
        + torso_rod.mass * (torso_rod.com_offset - com).powi(2)
        + i_blk
        + m_blk * com * com;
    let torso =
        LinkParams { mass: m_total, length: params.torso_length, com_offset: com, inertia };

    let foot_rod = LinkParams::rod(params.foot_mass, params.foot_length);
    // Ankle at the foot midpoint, CoM at the foot centre.
    let foot = LinkParams { com_offset: 0.0, ..foot_rod };

    let model = RobotModel {
        torso,
        thigh: LinkParams::rod(params.thigh_mass, params.thigh_length),
        shank: LinkParams::rod(params.shank_mass, params.shank_length),
        foot,
        foot_length: params.foot_length,
        foot_width: params.foot_width,
        stance_half_width: 0.05,
        torque_limit: params.torque_limit,
        joint_damping: params.joint_damping,
        joint_limits: [
            (-1.2, 1.2),
            (0.0, 2.2),
            (-0.8, 0.8),
            (-1.2, 1.2),
            (0.0, 2.2),
            (-0.8, 0.8),
        ],
    };
    for (name, link) in [
        ("torso", &model.torso),
        ("thigh", &model.thigh),
        ("shank", &model.shank),
        ("foot", &model.foot),
    ] {
        link.validate(name)?;
    }
    Ok(model)
}

/// Sum of all link masses (both legs).
pub fn total_mass(model: &RobotModel) -> f64 {
    model.torso.mass + 2.0 * (model.thigh.mass + model.shank.mass + model.foot.mass)
}

impl RobotModel {
    /// Hip height above the soles in the nominal standing pose.
    pub fn nominal_base_height(&self) -> f64 {
        self.thigh.length + self.shank.length
    }

    /// Torso CoM height above the soles in the nominal standing pose.
    pub fn nominal_torso_com_height(&self) -> f64 {
        self.nominal_base_height() + self.torso.com_offset
    }

    pub fn link(&self, id: LinkId) -> &LinkParams {
        match id {
            LinkId::Torso => &self.torso,
            LinkId::ThighL | LinkId::ThighR => &self.thigh,
            LinkId::ShankL | LinkId::ShankR => &self.shank,
            LinkId::FootL | LinkId::FootR => &self.foot,
        }
    }
}

/// Generalized position/velocity state.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub q: [f64; NQ],
    pub qd: [f64; NQ],
    pub t: f64,
}

impl RobotState {
    /// Nominal standing pose: straight legs, soles at `ground_z`.
    pub fn standing(model: &RobotModel, ground_z: f64) -> Self {
        let mut q = [0.0; NQ];
        q[1] = ground_z + model.nominal_base_height();
        RobotState { q, qd: [0.0; NQ], t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qd.iter()).all(|v| v.is_finite()) && self.t.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_total_mass_is_17_5() {
        let model = build_model(&RobotParams::default()).unwrap();
        assert!((total_mass(&model) - 17.5).abs() < 1e-12);
    }

    #[test]
    fn total_mass_scales_linearly() {
        let mut p = RobotParams::default();
        p.thigh_mass *= 2.0;
        p.shank_mass *= 2.0;
        p.torso_mass *= 2.0;
        p.hip_block_mass *= 2.0;
        p.foot_mass *= 2.0;
        let model = build_model(&p).unwrap();
        assert!((total_mass(&model) - 35.0).abs() < 1e-12);
    }

    #[test]
    fn default_lengths_from_table() {
        let model = build_model(&RobotParams::default()).unwrap();
        assert_eq!(model.thigh.length, 0.23);
        assert_eq!(model.shank.length, 0.23);
        assert_eq!(model.foot_length, 0.09);
        assert!((model.nominal_base_height() - 0.46).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_link_rejected() {
        let p = RobotParams { foot_mass: 0.0, ..RobotParams::default() };
        assert!(build_model(&p).is_err());
        let p = RobotParams { thigh_length: -0.1, ..RobotParams::default() };
        assert!(build_model(&p).is_err());
    }

    #[test]
    fn torso_lumping_preserves_mass_and_moment() {
        let model = build_model(&RobotParams::default()).unwrap();
        assert!((model.torso.mass - 5.5).abs() < 1e-12);
        // First moment about the hip: 4 * 0.115 + 1.5 * 0 = 0.46 kg m.
        assert!((model.torso.mass * model.torso.com_offset - 0.46).abs() < 1e-12);
    }

    #[test]
    fn rod_inertia() {
        let rod = LinkParams::rod(2.5, 0.23);
        assert!((rod.inertia - 2.5 * 0.23 * 0.23 / 12.0).abs() < 1e-15);
        assert!((rod.com_offset - 0.115).abs() < 1e-15);
    }
}
