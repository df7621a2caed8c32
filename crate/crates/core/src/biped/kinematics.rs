use std::f64::consts::{FRAC_PI_2, PI};

use super::model::{RobotModel, RobotState};
use super::NQ;
use crate::soil::{BodyTag, ContactSample};

// Coordinate indices into q.
pub(crate) const Q_X: usize = 0;
pub(crate) const Q_Z: usize = 1;
pub(crate) const Q_PITCH: usize = 2;
pub(crate) const Q_HIP_L: usize = 3;
pub(crate) const Q_KNEE_L: usize = 4;
pub(crate) const Q_ANKLE_L: usize = 5;
pub(crate) const Q_HIP_R: usize = 6;
pub(crate) const Q_KNEE_R: usize = 7;
pub(crate) const Q_ANKLE_R: usize = 8;

/// An absolute planar angle as a constant offset plus a signed sum of
/// coordinates. A link at angle `a` points along `(sin a, -cos a)`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Ang {
    pub off: f64,
    pub w: [f64; NQ],
}

impl Ang {
    fn new(off: f64, terms: &[(usize, f64)]) -> Self {
        let mut w = [0.0; NQ];
        for &(i, s) in terms {
            w[i] = s;
        }
        Ang { off, w }
    }

    pub fn value(&self, q: &[f64; NQ]) -> f64 {
        let mut a = self.off;
        for i in Q_PITCH..NQ {
            a += self.w[i] * q[i];
        }
        a
    }

    pub fn rate(&self, qd: &[f64; NQ]) -> f64 {
        let mut a = 0.0;
        for i in Q_PITCH..NQ {
            a += self.w[i] * qd[i];
        }
        a
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Seg {
    pub len: f64,
    pub ang: Ang,
}

/// Chain of up to three segments hanging off the floating base.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Chain {
    segs: [Seg; 3],
    n: usize,
}

impl Chain {
    pub fn new(segs: &[Seg]) -> Self {
        debug_assert!(segs.len() <= 3);
        let mut out = [Seg { len: 0.0, ang: Ang::default() }; 3];
        out[..segs.len()].copy_from_slice(segs);
        Chain { segs: out, n: segs.len() }
    }

    fn segs(&self) -> &[Seg] {
        &self.segs[..self.n]
    }

    pub fn point(&self, q: &[f64; NQ]) -> [f64; 2] {
        let mut p = [q[Q_X], q[Q_Z]];
        for s in self.segs() {
            let a = s.ang.value(q);
            p[0] += s.len * a.sin();
            p[1] -= s.len * a.cos();
        }
        p
    }

    pub fn velocity(&self, q: &[f64; NQ], qd: &[f64; NQ]) -> [f64; 2] {
        let mut v = [qd[Q_X], qd[Q_Z]];
        for s in self.segs() {
            let a = s.ang.value(q);
            let r = s.ang.rate(qd);
            v[0] += s.len * r * a.cos();
            v[1] += s.len * r * a.sin();
        }
        v
    }

    /// Rows are x and z; columns are the coordinates.
    pub fn jacobian(&self, q: &[f64; NQ]) -> [[f64; NQ]; 2] {
        let mut jx = [0.0; NQ];
        let mut jz = [0.0; NQ];
        jx[Q_X] = 1.0;
        jz[Q_Z] = 1.0;
        for s in self.segs() {
            let a = s.ang.value(q);
            let (sa, ca) = a.sin_cos();
            for i in Q_PITCH..NQ {
                let w = s.ang.w[i];
                if w != 0.0 {
                    jx[i] += s.len * w * ca;
                    jz[i] += s.len * w * sa;
                }
            }
        }
        [jx, jz]
    }

    /// Point acceleration at zero generalized acceleration (centripetal
    /// sweep of the segments).
    pub fn accel_bias(&self, q: &[f64; NQ], qd: &[f64; NQ]) -> [f64; 2] {
        let mut a0 = [0.0, 0.0];
        for s in self.segs() {
            let a = s.ang.value(q);
            let r = s.ang.rate(qd);
            a0[0] -= s.len * r * r * a.sin();
            a0[1] += s.len * r * r * a.cos();
        }
        a0
    }
}

/// Mass, planar inertia, absolute-angle weights and CoM chain of one link.
pub(crate) struct LinkDef {
    pub mass: f64,
    pub inertia: f64,
    pub theta: Ang,
    pub chain: Chain,
}

fn leg_angles(hip: usize, knee: usize, ankle: usize) -> (Ang, Ang, Ang) {
    let thigh = Ang::new(0.0, &[(Q_PITCH, 1.0), (hip, 1.0)]);
    let shank = Ang::new(0.0, &[(Q_PITCH, 1.0), (hip, 1.0), (knee, -1.0)]);
    let foot =
        Ang::new(FRAC_PI_2, &[(Q_PITCH, 1.0), (hip, 1.0), (knee, -1.0), (ankle, 1.0)]);
    (thigh, shank, foot)
}

/// Per-link kinematic definitions in `LinkId` order.
pub(crate) fn link_table(model: &RobotModel) -> [LinkDef; 7] {
    let torso_ang = Ang::new(PI, &[(Q_PITCH, 1.0)]);
    let (thigh_l, shank_l, foot_l) = leg_angles(Q_HIP_L, Q_KNEE_L, Q_ANKLE_L);
    let (thigh_r, shank_r, foot_r) = leg_angles(Q_HIP_R, Q_KNEE_R, Q_ANKLE_R);

    let leg_links = |thigh: Ang, shank: Ang, foot: Ang| {
        (
            LinkDef {
                mass: model.thigh.mass,
                inertia: model.thigh.inertia,
                theta: thigh,
                chain: Chain::new(&[Seg { len: model.thigh.com_offset, ang: thigh }]),
            },
            LinkDef {
                mass: model.shank.mass,
                inertia: model.shank.inertia,
                theta: shank,
                chain: Chain::new(&[
                    Seg { len: model.thigh.length, ang: thigh },
                    Seg { len: model.shank.com_offset, ang: shank },
                ]),
            },
            LinkDef {
                mass: model.foot.mass,
                inertia: model.foot.inertia,
                theta: foot,
                chain: Chain::new(&[
                    Seg { len: model.thigh.length, ang: thigh },
                    Seg { len: model.shank.length, ang: shank },
                    Seg { len: model.foot.com_offset, ang: foot },
                ]),
            },
        )
    };
    let (tl, sl, fl) = leg_links(thigh_l, shank_l, foot_l);
    let (tr, sr, fr) = leg_links(thigh_r, shank_r, foot_r);

    [
        LinkDef {
            mass: model.torso.mass,
            inertia: model.torso.inertia,
            theta: torso_ang,
            chain: Chain::new(&[Seg { len: model.torso.com_offset, ang: torso_ang }]),
        },
        tl,
        sl,
        fl,
        tr,
        sr,
        fr,
    ]
}

/// Chain to an arbitrary point on a foot, `arc` metres from the ankle
/// toward the toe (negative toward the heel).
pub(crate) fn foot_point_chain(model: &RobotModel, left: bool, arc: f64) -> Chain {
    let (thigh, shank, foot) = if left {
        leg_angles(Q_HIP_L, Q_KNEE_L, Q_ANKLE_L)
    } else {
        leg_angles(Q_HIP_R, Q_KNEE_R, Q_ANKLE_R)
    };
    Chain::new(&[
        Seg { len: model.thigh.length, ang: thigh },
        Seg { len: model.shank.length, ang: shank },
        Seg { len: arc, ang: foot },
    ])
}

/// World pose of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPose {
    pub com: [f64; 2],
    pub angle: f64,
}

/// World points of one flat foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootPoints {
    pub ankle: [f64; 2],
    pub heel: [f64; 2],
    pub toe: [f64; 2],
    /// Sole angle to the horizontal; 0 is flat.
    pub pitch: f64,
}

/// Full forward kinematics snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub hip: [f64; 2],
    /// Knee joints, left then right.
    pub knee: [[f64; 2]; 2],
    /// Feet, left then right.
    pub foot: [FootPoints; 2],
    /// Link poses in `LinkId` order.
    pub links: [LinkPose; 7],
}

pub fn forward_kinematics(model: &RobotModel, q: &[f64; NQ]) -> Kinematics {
    let table = link_table(model);
    let links = std::array::from_fn(|k| LinkPose {
        com: table[k].chain.point(q),
        angle: table[k].theta.value(q),
    });

    let half = model.foot_length / 2.0;
    let mut knee = [[0.0; 2]; 2];
    let mut foot = [FootPoints { ankle: [0.0; 2], heel: [0.0; 2], toe: [0.0; 2], pitch: 0.0 }; 2];
    for (side, left) in [(0usize, true), (1usize, false)] {
        let (hip_i, knee_i, ankle_i) = if left {
            (Q_HIP_L, Q_KNEE_L, Q_ANKLE_L)
        } else {
            (Q_HIP_R, Q_KNEE_R, Q_ANKLE_R)
        };
        let (thigh, shank, _) = leg_angles(hip_i, knee_i, ankle_i);
        knee[side] = Chain::new(&[Seg { len: model.thigh.length, ang: thigh }]).point(q);
        let ankle = Chain::new(&[
            Seg { len: model.thigh.length, ang: thigh },
            Seg { len: model.shank.length, ang: shank },
        ])
        .point(q);
        let pitch = q[Q_PITCH] + q[hip_i] - q[knee_i] + q[ankle_i];
        let dir = [pitch.cos(), pitch.sin()];
        foot[side] = FootPoints {
            ankle,
            heel: [ankle[0] - half * dir[0], ankle[1] - half * dir[1]],
            toe: [ankle[0] + half * dir[0], ankle[1] + half * dir[1]],
            pitch,
        };
    }

    Kinematics { hip: [q[Q_X], q[Q_Z]], knee, foot, links }
}

/// Whole-body centre of mass.
pub fn com(model: &RobotModel, q: &[f64; NQ]) -> [f64; 2] {
    let table = link_table(model);
    let mut c = [0.0, 0.0];
    let mut m = 0.0;
    for link in &table {
        let p = link.chain.point(q);
        c[0] += link.mass * p[0];
        c[1] += link.mass * p[1];
        m += link.mass;
    }
    [c[0] / m, c[1] / m]
}

/// Whole-body centre-of-mass velocity.
pub fn com_velocity(model: &RobotModel, q: &[f64; NQ], qd: &[f64; NQ]) -> [f64; 2] {
    let table = link_table(model);
    let mut v = [0.0, 0.0];
    let mut m = 0.0;
    for link in &table {
        let pv = link.chain.velocity(q, qd);
        v[0] += link.mass * pv[0];
        v[1] += link.mass * pv[1];
        m += link.mass;
    }
    [v[0] / m, v[1] / m]
}

/// Contact probe points along each sole, heel to toe, with rigid-body
/// velocities. The lateral coordinate is the foot centerline.
pub fn foot_contact_samples(
    model: &RobotModel,
    state: &RobotState,
    n_per_foot: usize,
) -> Vec<ContactSample> {
    debug_assert!(n_per_foot >= 2);
    let n = n_per_foot.max(2);
    let half = model.foot_length / 2.0;
    let mut samples = Vec::with_capacity(2 * n);
    for (left, y_c, owner) in [
        (true, model.stance_half_width, BodyTag::LeftFoot),
        (false, -model.stance_half_width, BodyTag::RightFoot),
    ] {
        for k in 0..n {
            let arc = -half + model.foot_length * k as f64 / (n - 1) as f64;
            let chain = foot_point_chain(model, left, arc);
            let p = chain.point(&state.q);
            let v = chain.velocity(&state.q, &state.qd);
            samples.push(ContactSample {
                world_pos: [p[0], y_c, p[1]],
                velocity: [v[0], 0.0, v[1]],
                owner,
            });
        }
    }
    samples
}
