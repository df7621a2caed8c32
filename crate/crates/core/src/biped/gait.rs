use std::f64::consts::TAU;

use super::model::RobotModel;
use super::BipedError;

/// Cycloidal swing-ankle reference: step length, apex height and cycle
/// period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitReference {
    pub step_length: f64,
    pub step_height: f64,
    pub period: f64,
}

impl GaitReference {
    pub fn validate(&self) -> Result<(), BipedError> {
        if !(self.step_length > 0.0 && self.step_height > 0.0 && self.period > 0.0) {
            return Err(BipedError::Parameter(format!("gait fields must be > 0: {self:?}")));
        }
        Ok(())
    }
}

/// Ankle target on the cycloid at time `t`: starts and ends each cycle at
/// zero velocity, peaking at `step_height` mid-swing.
pub fn cycloid_reference(gait: &GaitReference, t: f64) -> (f64, f64) {
    let phase = TAU * (t.rem_euclid(gait.period)) / gait.period;
    let x = gait.step_length * (phase - phase.sin()) / TAU;
    let z = gait.step_height * (1.0 - phase.cos()) / 2.0;
    (x, z)
}

/// Closed-form planar two-link inverse kinematics for one leg, knee
/// flexing backward (human-like, knee vertex ahead of the hip-ankle line).
/// Returns `(hip_angle, knee_angle)` with the pitch assumed zero; callers
/// subtract base pitch for a floating torso.
pub fn leg_ik(
    model: &RobotModel,
    hip_pos: [f64; 2],
    ankle_target: [f64; 2],
) -> Result<(f64, f64), BipedError> {
    let l1 = model.thigh.length;
    let l2 = model.shank.length;
    let dx = ankle_target[0] - hip_pos[0];
    let dz = ankle_target[1] - hip_pos[1];
    let d = (dx * dx + dz * dz).sqrt();
    if d > l1 + l2 || d < (l1 - l2).abs() {
        return Err(BipedError::Unreachable(format!(
            "target at {d:.4} m, reach is [{:.4}, {:.4}]",
            (l1 - l2).abs(),
            l1 + l2
        )));
    }

    // Interior knee angle from the law of cosines; joint angle is its
    // supplement so a straight leg reads zero.
    let cos_interior = ((l1 * l1 + l2 * l2 - d * d) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let knee = std::f64::consts::PI - cos_interior.acos();

    // Hip-to-target direction in the leg convention (0 points down), plus
    // the offset between thigh and the reach line.
    let gamma = dx.atan2(-dz);
    let cos_beta = ((l1 * l1 + d * d - l2 * l2) / (2.0 * l1 * d)).clamp(-1.0, 1.0);
    let hip = gamma + cos_beta.acos();

    Ok((hip, knee))
}
