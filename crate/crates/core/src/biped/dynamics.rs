use super::kinematics::{forward_kinematics, link_table, Q_PITCH};
use super::model::{LinkId, RobotModel, RobotState};
use super::{BipedError, NQ};

/// External force on a point rigidly attached to a link, in world
/// coordinates (x forward, z up).
#[derive(Debug, Clone, Copy)]
pub struct ExternalForce {
    pub body: LinkId,
    pub point: [f64; 2],
    pub force: [f64; 2],
}

/// Integration options. The defaults are the production configuration;
/// tests use zero gravity for momentum audits and a pinned base for
/// pendulum-style energy audits.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub gravity: f64,
    pub fixed_base: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { gravity: 9.81, fixed_base: false }
    }
}

const MAX_DT: f64 = 5e-3;

/// One semi-implicit Euler step of `M(q) qdd = tau - C(q, qd) + J^T f`:
/// velocities first, then positions, then joint-limit clamping with
/// velocity zeroing. Torques clamp to the model's limit.
pub fn dynamics_step(
    model: &RobotModel,
    state: &RobotState,
    torques: &[f64; 6],
    external: &[ExternalForce],
    dt: f64,
) -> Result<RobotState, BipedError> {
    dynamics_step_with(model, state, torques, external, dt, &SimOptions::default())
}

pub fn dynamics_step_with(
    model: &RobotModel,
    state: &RobotState,
    torques: &[f64; 6],
    external: &[ExternalForce],
    dt: f64,
    opts: &SimOptions,
) -> Result<RobotState, BipedError> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(BipedError::Parameter(format!("dt must be in (0, {MAX_DT}], got {dt}")));
    }
    if !state.is_finite() {
        return Err(BipedError::Integration("non-finite state entering step".into()));
    }

    let q = &state.q;
    let qd = &state.qd;
    let table = link_table(model);

    // Assemble mass matrix and velocity-product bias from per-link data.
    let mut mass = [[0.0; NQ]; NQ];
    let mut rhs = [0.0; NQ];
    for link in &table {
        let jac = link.chain.jacobian(q);
        let a0 = link.chain.accel_bias(q, qd);
        for r in 0..NQ {
            let jxr = jac[0][r];
            let jzr = jac[1][r];
            let wr = link.theta.w[r];
            for c in r..NQ {
                mass[r][c] +=
                    link.mass * (jxr * jac[0][c] + jzr * jac[1][c]) + link.inertia * wr * link.theta.w[c];
            }
            rhs[r] -= link.mass * (jxr * a0[0] + jzr * a0[1]);
        }
    }
    for r in 1..NQ {
        for c in 0..r {
            mass[r][c] = mass[c][r];
        }
    }

    // Joint torques act directly on their coordinates. Viscous joint
    // friction is integrated implicitly: with qd' = qd + dt*qdd the drag
    // -b*qd' moves dt*b onto the mass diagonal, which keeps even light
    // links stable at any damping level.
    for (j, &tau) in torques.iter().enumerate() {
        rhs[3 + j] += tau.clamp(-model.torque_limit, model.torque_limit);
        rhs[3 + j] -= model.joint_damping * qd[3 + j];
        mass[3 + j][3 + j] += dt * model.joint_damping;
    }

    // External forces through the point Jacobian of the carrying link:
    // d(p)/d(q_i) = w_i * rot90(p - pivot_i) for each ancestor coordinate.
    if !external.is_empty() {
        let kin = forward_kinematics(model, q);
        for ext in external {
            let p = ext.point;
            let f = ext.force;
            rhs[0] += f[0];
            rhs[1] += f[1];
            let theta = &table[ext.body.index()].theta;
            for i in Q_PITCH..NQ {
                let w = theta.w[i];
                if w == 0.0 {
                    continue;
                }
                let pivot = pivot_of(&kin, ext.body, i);
                let r = [p[0] - pivot[0], p[1] - pivot[1]];
                // rot90(r) = (-r_z, r_x)
                rhs[i] += w * (-r[1] * f[0] + r[0] * f[1]);
            }
        }
    }

    if opts.fixed_base {
        // Gravity must enter explicitly once the base is pinned.
        if opts.gravity != 0.0 {
            for link in &table {
                let jac = link.chain.jacobian(q);
                for r in 3..NQ {
                    rhs[r] -= link.mass * opts.gravity * jac[1][r];
                }
            }
        }
    }

    let active: &[usize] = if opts.fixed_base { &[3, 4, 5, 6, 7, 8] } else { &[0, 1, 2, 3, 4, 5, 6, 7, 8] };
    let mut qdd = solve_spd(&mass, &rhs, active)?;

    // In floating coordinates a uniform field is exactly a base
    // acceleration: M * (0, -g, 0, ...) equals the generalized gravity
    // vector, so adding it here keeps free fall bit-exact.
    if !opts.fixed_base {
        qdd[1] -= opts.gravity;
    }

    let mut next = state.clone();
    if opts.fixed_base {
        next.qd[0] = 0.0;
        next.qd[1] = 0.0;
        next.qd[2] = 0.0;
    }
    for i in 0..NQ {
        next.qd[i] += dt * qdd[i];
    }
    for i in 0..NQ {
        next.q[i] += dt * next.qd[i];
    }

    for j in 0..6 {
        let (lo, hi) = model.joint_limits[j];
        let qi = &mut next.q[3 + j];
        if *qi < lo {
            *qi = lo;
            next.qd[3 + j] = 0.0;
        } else if *qi > hi {
            *qi = hi;
            next.qd[3 + j] = 0.0;
        }
    }

    next.t += dt;
    if !next.is_finite() {
        return Err(BipedError::Integration("non-finite state after step".into()));
    }
    Ok(next)
}

/// World pivot position for coordinate `i` as seen by `body`.
fn pivot_of(kin: &super::kinematics::Kinematics, body: LinkId, i: usize) -> [f64; 2] {
    use super::kinematics::{Q_ANKLE_L, Q_ANKLE_R, Q_KNEE_L, Q_KNEE_R};
    match i {
        Q_KNEE_L => kin.knee[0],
        Q_KNEE_R => kin.knee[1],
        Q_ANKLE_L => kin.foot[0].ankle,
        Q_ANKLE_R => kin.foot[1].ankle,
        // Pitch and both hips pivot at the base point.
        _ => {
            let _ = body;
            kin.hip
        }
    }
}

/// Cholesky solve of the symmetric positive-definite subsystem over the
/// `active` coordinates; inactive entries come back zero.
fn solve_spd(mass: &[[f64; NQ]; NQ], rhs: &[f64; NQ], active: &[usize]) -> Result<[f64; NQ], BipedError> {
    let n = active.len();
    let mut a = [[0.0; NQ]; NQ];
    let mut b = [0.0; NQ];
    for (r, &ar) in active.iter().enumerate() {
        for (c, &ac) in active.iter().enumerate() {
            a[r][c] = mass[ar][ac];
        }
        b[r] = rhs[ar];
    }

    // In-place LL^T factorization.
    for k in 0..n {
        let mut d = a[k][k];
        for j in 0..k {
            d -= a[k][j] * a[k][j];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(BipedError::Integration(format!(
                "mass matrix lost positive definiteness (pivot {d})"
            )));
        }
        let l = d.sqrt();
        a[k][k] = l;
        for i in (k + 1)..n {
            let mut s = a[i][k];
            for j in 0..k {
                s -= a[i][j] * a[k][j];
            }
            a[i][k] = s / l;
        }
    }
    // Forward then backward substitution.
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= a[i][j] * b[j];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[j][i] * b[j];
        }
        b[i] = s / a[i][i];
    }

    let mut out = [0.0; NQ];
    for (r, &ar) in active.iter().enumerate() {
        out[ar] = b[r];
    }
    Ok(out)
}

/// True once the torso CoM drops below 60% of its nominal standing height
/// or the base pitch exceeds one radian.
pub fn detect_fall(model: &RobotModel, state: &RobotState) -> bool {
    let kin = forward_kinematics(model, &state.q);
    let torso_z = kin.links[LinkId::Torso.index()].com[1];
    torso_z < 0.6 * model.nominal_torso_com_height() || state.q[Q_PITCH].abs() > 1.0
}

/// Kinetic plus gravitational potential energy, for conservation audits.
pub fn mechanical_energy(model: &RobotModel, state: &RobotState, gravity: f64) -> f64 {
    let table = link_table(model);
    let mut e = 0.0;
    for link in &table {
        let v = link.chain.velocity(&state.q, &state.qd);
        let w = link.theta.rate(&state.qd);
        let p = link.chain.point(&state.q);
        e += 0.5 * link.mass * (v[0] * v[0] + v[1] * v[1]) + 0.5 * link.inertia * w * w;
        e += link.mass * gravity * p[1];
    }
    e
}

/// Total linear momentum of all links.
#[cfg(test)]
pub(crate) fn linear_momentum(model: &RobotModel, state: &RobotState) -> [f64; 2] {
    let table = link_table(model);
    let mut p = [0.0, 0.0];
    for link in &table {
        let v = link.chain.velocity(&state.q, &state.qd);
        p[0] += link.mass * v[0];
        p[1] += link.mass * v[1];
    }
    p
}
