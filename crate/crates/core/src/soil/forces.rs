use std::collections::{BTreeMap, BTreeSet};

use super::{detect_patches, NodeState, SoilError, SoilParams, TerrainGrid};

/// Which body a contact sample belongs to, for per-foot force bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyTag {
    LeftFoot,
    RightFoot,
    Other,
}

/// One surface point probing the soil: world position, world velocity and
/// the body it rides on.
#[derive(Debug, Clone, Copy)]
pub struct ContactSample {
    pub world_pos: [f64; 3],
    pub velocity: [f64; 3],
    pub owner: BodyTag,
}

/// Force/torque pair about a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: [f64; 3],
    pub torque: [f64; 3],
    pub ref_point: [f64; 3],
}

/// Bekker-Wong contact pressure `(k_c/b + k_phi) * y^n`.
pub fn bekker_pressure(p: &SoilParams, b: f64, y: f64) -> Result<f64, SoilError> {
    if !(b > 0.0) {
        return Err(SoilError::Parameter(format!("patch width b must be > 0, got {b}")));
    }
    if !(y >= 0.0) {
        return Err(SoilError::Parameter(format!("sinkage y must be >= 0, got {y}")));
    }
    Ok((p.k_c / b + p.k_phi) * y.powf(p.n))
}

/// Nodal pressure with plastic memory, elastic unload/reload and vertical
/// damping. `y_total` is penetration below the rest surface, `v_n` is
/// positive in compression. Soil never pulls: the result clamps at zero.
pub fn node_pressure(
    p: &SoilParams,
    node: &NodeState,
    y_total: f64,
    v_n: f64,
    b: f64,
) -> Result<f64, SoilError> {
    if !(y_total >= 0.0) {
        return Err(SoilError::Parameter(format!("penetration must be >= 0, got {y_total}")));
    }
    let static_part = if y_total >= node.plastic_sinkage {
        bekker_pressure(p, b, y_total)?
    } else {
        let peak = bekker_pressure(p, b, node.plastic_sinkage)?;
        (peak - p.elastic_k * (node.plastic_sinkage - y_total)).max(0.0)
    };
    Ok((static_part + p.damping_r * v_n).max(0.0))
}

/// Mohr-Coulomb shear strength `sigma * tan(theta) + c`.
pub fn shear_limit(sigma_normal: f64, p: &SoilParams) -> Result<f64, SoilError> {
    if !(sigma_normal >= 0.0) {
        return Err(SoilError::Parameter(format!(
            "normal stress must be >= 0, got {sigma_normal}"
        )));
    }
    Ok(sigma_normal * p.friction_angle.tan() + p.cohesion_c)
}

/// Janosi-Hanamoto mobilized shear stress `tau_max * (1 - exp(-j/K))`.
pub fn janosi_shear(tau_max: f64, shear_j: f64, k: f64) -> Result<f64, SoilError> {
    if !(k > 0.0) {
        return Err(SoilError::Parameter(format!("shear parameter K must be > 0, got {k}")));
    }
    debug_assert!(tau_max >= 0.0 && shear_j >= 0.0);
    Ok(tau_max * (1.0 - (-shear_j / k).exp()))
}

/// Sum forces and their torques about `ref_point`.
pub fn resultant_wrench(forces: &[([f64; 3], [f64; 3])], ref_point: [f64; 3]) -> Wrench {
    let mut force = [0.0; 3];
    let mut torque = [0.0; 3];
    for (pos, f) in forces {
        let r = [pos[0] - ref_point[0], pos[1] - ref_point[1], pos[2] - ref_point[2]];
        force[0] += f[0];
        force[1] += f[1];
        force[2] += f[2];
        torque[0] += r[1] * f[2] - r[2] * f[1];
        torque[1] += r[2] * f[0] - r[0] * f[2];
        torque[2] += r[0] * f[1] - r[1] * f[0];
    }
    Wrench { force, torque, ref_point }
}

const SLIP_EPS: f64 = 1e-12;

/// Advance the soil state one step under the given contact samples and
/// return the force carried by each sample.
///
/// Per step: samples map to their nearest nodes; penetrating nodes are
/// grouped into 4-connected patches whose width feeds the `k_c/b` term;
/// each node gets a normal force `sigma * h^2` and a tangential force
/// capped by Mohr-Coulomb and mobilized by accumulated slip; plastic
/// sinkage ratchets to the deepest penetration seen. A node's force is
/// split evenly over the samples that landed on it. Nodes that lost
/// contact reset their shear memory.
pub fn step_contact(
    grid: &mut TerrainGrid,
    params: &SoilParams,
    samples: &[ContactSample],
    dt: f64,
) -> Result<Vec<[f64; 3]>, SoilError> {
    if !(dt > 0.0) {
        return Err(SoilError::Parameter(format!("dt must be > 0, got {dt}")));
    }

    let rest = grid.rest_height();
    let h = grid.spacing();
    let cell_area = h * h;

    // Group samples by nearest node, keeping the deepest sample as the
    // node's representative for penetration and velocity.
    struct NodeHit {
        sample_ids: Vec<usize>,
        y_total: f64,
        rep: usize,
    }
    let mut hits: BTreeMap<(i64, i64), NodeHit> = BTreeMap::new();
    for (si, s) in samples.iter().enumerate() {
        debug_assert!(s.world_pos.iter().chain(s.velocity.iter()).all(|v| v.is_finite()));
        let idx = grid.node_index(s.world_pos[0], s.world_pos[1]);
        let y = (rest - s.world_pos[2]).max(0.0);
        let hit = hits.entry(idx).or_insert(NodeHit { sample_ids: Vec::new(), y_total: 0.0, rep: si });
        hit.sample_ids.push(si);
        if y > hit.y_total {
            hit.y_total = y;
            hit.rep = si;
        }
    }

    let contact_set: BTreeSet<(i64, i64)> =
        hits.iter().filter(|(_, hit)| hit.y_total > 0.0).map(|(&idx, _)| idx).collect();

    // Patch width per node; nodes keep their patch's b for the k_c term.
    let mut widths: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for patch in detect_patches(h, &contact_set) {
        for idx in &patch.node_indices {
            widths.insert(*idx, patch.width_b);
        }
    }

    let mut forces = vec![[0.0; 3]; samples.len()];

    for (&idx, hit) in &hits {
        if hit.y_total <= 0.0 {
            continue;
        }
        let b = widths[&idx];
        let rep = &samples[hit.rep];
        let v_n = -rep.velocity[2]; // downward motion compresses
        let vt = [rep.velocity[0], rep.velocity[1]];
        let slip_speed = (vt[0] * vt[0] + vt[1] * vt[1]).sqrt();

        let node_before = grid.node(idx);
        let sigma = node_pressure(params, &node_before, hit.y_total, v_n, b)?;
        let f_normal = sigma * cell_area;

        let shear_j = node_before.shear_j + slip_speed * dt;
        let tau_max = shear_limit(sigma, params)?;
        let tau = janosi_shear(tau_max, shear_j, params.janosi_k)?.min(tau_max);
        let f_tan_mag = tau * cell_area;
        let f_tan = if slip_speed > SLIP_EPS {
            [-vt[0] / slip_speed * f_tan_mag, -vt[1] / slip_speed * f_tan_mag]
        } else {
            [0.0, 0.0]
        };

        let node = grid.node_mut(idx);
        node.plastic_sinkage = node.plastic_sinkage.max(hit.y_total);
        node.shear_j = shear_j;
        node.in_contact = true;

        let share = 1.0 / hit.sample_ids.len() as f64;
        for &si in &hit.sample_ids {
            forces[si] = [f_tan[0] * share, f_tan[1] * share, f_normal * share];
        }
    }

    // Separation resets shear memory, keeps the footprint.
    for (idx, node) in grid.nodes_mut() {
        if node.in_contact && !contact_set.contains(idx) {
            node.in_contact = false;
            node.shear_j = 0.0;
        }
    }

    Ok(forces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frictionless() -> SoilParams {
        SoilParams { cohesion_c: 0.0, ..SoilParams::default() }
    }

    // Frozen oracle values, evaluated with 40-digit arithmetic:
    //   2e5 * 0.01^1.1          = 1261.914688960386...
    //   (2e4 + 2e5) * 0.01^1.1  = 1388.106157856425...
    //   2e5 * 0.0081^1.1        = 1000.837377919207...
    //   1000 * tan(pi/6)        =  577.3502691896258...
    //   1 - exp(-1)             =    0.6321205588285577...
    const SIGMA_Y01: f64 = 1261.9146889603865;
    const SIGMA_Y01_KC: f64 = 1388.1061578564251;
    const SIGMA_Y0081: f64 = 1000.8373779192073;

    #[test]
    fn bekker_matches_oracle() {
        let p = frictionless();
        let s = bekker_pressure(&p, 1.0, 0.01).unwrap();
        assert!((s - SIGMA_Y01).abs() / SIGMA_Y01 < 1e-12, "got {s}");
        // b only matters through k_c.
        let s2 = bekker_pressure(&p, 0.001, 0.01).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn bekker_with_cohesive_term() {
        let p = SoilParams { k_c: 1000.0, ..frictionless() };
        let s = bekker_pressure(&p, 0.05, 0.01).unwrap();
        assert!((s - SIGMA_Y01_KC).abs() / SIGMA_Y01_KC < 1e-12, "got {s}");
    }

    #[test]
    fn bekker_zero_sinkage_zero_pressure() {
        let p = frictionless();
        assert_eq!(bekker_pressure(&p, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bekker_guards() {
        let p = frictionless();
        assert!(bekker_pressure(&p, 0.0, 0.01).is_err());
        assert!(bekker_pressure(&p, 0.1, -0.01).is_err());
    }

    #[test]
    fn bekker_monotone_in_sinkage() {
        let p = frictionless();
        let mut prev = 0.0;
        for k in 1..50 {
            let y = k as f64 * 1e-3;
            let s = bekker_pressure(&p, 0.05, y).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn node_pressure_loading_matches_bekker_plus_damping() {
        let p = frictionless();
        let fresh = NodeState::default();
        let s0 = node_pressure(&p, &fresh, 0.01, 0.0, 1.0).unwrap();
        assert!((s0 - SIGMA_Y01).abs() / SIGMA_Y01 < 1e-12);
        let s1 = node_pressure(&p, &fresh, 0.01, 0.1, 1.0).unwrap();
        assert!((s1 - (SIGMA_Y01 + 3000.0)).abs() < 1e-9, "got {s1}");
    }

    #[test]
    fn node_pressure_clamps_on_fast_separation() {
        let p = frictionless();
        let node = NodeState { plastic_sinkage: 0.01, shear_j: 0.0, in_contact: true };
        let s = node_pressure(&p, &node, 0.01, -1.0, 1.0).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn node_pressure_unload_branch_is_stiff() {
        let p = frictionless();
        let node = NodeState { plastic_sinkage: 0.01, shear_j: 0.0, in_contact: true };
        let peak = bekker_pressure(&p, 1.0, 0.01).unwrap();
        // A hair above the plastic depth unloads almost all pressure.
        let y = 0.01 - 2e-5;
        let s = node_pressure(&p, &node, y, 0.0, 1.0).unwrap();
        let expect = (peak - p.elastic_k * 2e-5).max(0.0);
        assert!((s - expect).abs() < 1e-9, "got {s}, expect {expect}");
        // Deep unload clamps to zero.
        let s0 = node_pressure(&p, &node, 0.001, 0.0, 1.0).unwrap();
        assert_eq!(s0, 0.0);
    }

    #[test]
    fn node_pressure_rejects_negative_penetration() {
        let p = frictionless();
        assert!(node_pressure(&p, &NodeState::default(), -1e-9, 0.0, 1.0).is_err());
    }

    #[test]
    fn shear_limit_cases() {
        let p = SoilParams::default(); // theta = 30 deg, c = 0
        let t = shear_limit(1000.0, &p).unwrap();
        assert!((t - 577.3502691896258).abs() < 1e-9, "got {t}");
        assert_eq!(shear_limit(0.0, &p).unwrap(), 0.0);
        let pc = SoilParams { cohesion_c: 500.0, ..SoilParams::default() };
        assert_eq!(shear_limit(0.0, &pc).unwrap(), 500.0);
        assert!(shear_limit(-1.0, &p).is_err());
    }

    #[test]
    fn janosi_cases() {
        assert_eq!(janosi_shear(100.0, 0.0, 0.01).unwrap(), 0.0);
        let t = janosi_shear(100.0, 0.01, 0.01).unwrap();
        assert!((t - 63.21205588285577).abs() < 1e-10, "got {t}");
        let sat = janosi_shear(100.0, 1.0, 0.01).unwrap();
        assert!((sat - 100.0).abs() / 100.0 < 1e-9);
        assert!(janosi_shear(100.0, 0.01, 0.0).is_err());
    }

    #[test]
    fn wrench_identities() {
        let w = resultant_wrench(&[], [0.0; 3]);
        assert_eq!(w.force, [0.0; 3]);
        assert_eq!(w.torque, [0.0; 3]);

        // Equal and opposite forces at symmetric offsets: pure couple.
        let f = 3.0;
        let w = resultant_wrench(
            &[([1.0, 0.0, 0.0], [0.0, 0.0, f]), ([-1.0, 0.0, 0.0], [0.0, 0.0, -f])],
            [0.0; 3],
        );
        assert_eq!(w.force, [0.0; 3]);
        assert!((w.torque[1] - (-2.0 * f)).abs() < 1e-12);

        // Single force through the reference point: no torque.
        let w = resultant_wrench(&[([0.5, 1.0, -2.0], [1.0, 2.0, 3.0])], [0.5, 1.0, -2.0]);
        assert_eq!(w.force, [1.0, 2.0, 3.0]);
        assert_eq!(w.torque, [0.0; 3]);
    }

    fn resting_sample(z: f64) -> ContactSample {
        ContactSample { world_pos: [0.0, 0.0, z], velocity: [0.0; 3], owner: BodyTag::Other }
    }

    #[test]
    fn no_penetration_no_force_no_node() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        let f = step_contact(&mut g, &p, &[resting_sample(0.0)], 1e-3).unwrap();
        assert_eq!(f[0], [0.0; 3]);
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn static_sample_normal_force_matches_oracle() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        let f = step_contact(&mut g, &p, &[resting_sample(-0.0081)], 1e-3).unwrap();
        let expect = SIGMA_Y0081 * 1e-4;
        assert!((f[0][2] - expect).abs() / expect < 1e-12, "got {}", f[0][2]);
        assert_eq!(f[0][0], 0.0);
        assert_eq!(f[0][1], 0.0);
        let node = g.node((0, 0));
        assert!((node.plastic_sinkage - 0.0081).abs() < 1e-15);
        assert!(node.in_contact);
    }

    #[test]
    fn sliding_sample_saturates_to_mohr_coulomb() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        let dt = 1e-3;
        let sample = ContactSample {
            world_pos: [0.0, 0.0, -0.005],
            velocity: [0.2, 0.0, 0.0],
            owner: BodyTag::Other,
        };
        let mut last = [0.0; 3];
        for _ in 0..2000 {
            last = step_contact(&mut g, &p, &[sample], dt).unwrap()[0];
        }
        // j = 2000 * 0.2 * 1e-3 = 0.4 m >> K: fully mobilized.
        let sigma = bekker_pressure(&p, 0.005, 0.005).unwrap();
        let tau_max = shear_limit(sigma, &p).unwrap();
        let expect = tau_max * 1e-4;
        let mag = (last[0] * last[0] + last[1] * last[1]).sqrt();
        assert!((mag - expect).abs() / expect < 1e-9, "got {mag}, expect {expect}");
        // Opposes the slip direction.
        assert!(last[0] < 0.0);
    }

    #[test]
    fn shear_memory_resets_on_separation() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        let sliding = ContactSample {
            world_pos: [0.0, 0.0, -0.005],
            velocity: [0.1, 0.0, 0.0],
            owner: BodyTag::Other,
        };
        step_contact(&mut g, &p, &[sliding], 1e-3).unwrap();
        assert!(g.node((0, 0)).shear_j > 0.0);
        // Lift off: same node loses contact.
        step_contact(&mut g, &p, &[resting_sample(0.1)], 1e-3).unwrap();
        let node = g.node((0, 0));
        assert_eq!(node.shear_j, 0.0);
        assert!(!node.in_contact);
        assert!(node.plastic_sinkage > 0.0, "footprint persists");
    }

    #[test]
    fn plastic_sinkage_never_decreases() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        let mut prev = 0.0;
        for depth in [0.002, 0.006, 0.004, 0.009, 0.001] {
            step_contact(&mut g, &p, &[resting_sample(-depth)], 1e-3).unwrap();
            let y = g.node((0, 0)).plastic_sinkage;
            assert!(y >= prev);
            prev = y;
        }
        assert!((prev - 0.009).abs() < 1e-15);
        assert!((g.height_at(0.0, 0.0) - (-0.009)).abs() < 1e-15);
    }

    #[test]
    fn shared_node_splits_force() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        let a = resting_sample(-0.004);
        let b = ContactSample {
            world_pos: [0.001, 0.0, -0.004],
            velocity: [0.0; 3],
            owner: BodyTag::Other,
        };
        let f = step_contact(&mut g, &p, &[a, b], 1e-3).unwrap();
        assert!((f[0][2] - f[1][2]).abs() < 1e-15);
        let total = f[0][2] + f[1][2];
        let sigma = bekker_pressure(&p, 0.005, 0.004).unwrap();
        assert!((total - sigma * 1e-4).abs() / total < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        let p = SoilParams::default();
        assert!(step_contact(&mut g, &p, &[], 0.0).is_err());
    }
}
