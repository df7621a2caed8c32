use std::collections::BTreeSet;

/// A 4-connected component of contact nodes with its Bekker footprint
/// estimate `b = 2A / L`.
#[derive(Debug, Clone)]
pub struct ContactPatch {
    pub node_indices: BTreeSet<(i64, i64)>,
    /// Footprint area, one cell `h^2` per node (m^2).
    pub area_a: f64,
    /// Perimeter from exposed cell edges (m).
    pub perimeter_l: f64,
    /// Characteristic footprint length `2A / L` (m).
    pub width_b: f64,
}

/// Partition `contact_nodes` into 4-connected patches. Area counts `h^2`
/// per node; the perimeter counts cell edges not shared with another
/// contact node.
pub fn detect_patches(spacing: f64, contact_nodes: &BTreeSet<(i64, i64)>) -> Vec<ContactPatch> {
    let mut patches = Vec::new();
    let mut visited: BTreeSet<(i64, i64)> = BTreeSet::new();

    for &start in contact_nodes {
        if visited.contains(&start) {
            continue;
        }
        let mut members = BTreeSet::new();
        let mut stack = vec![start];
        visited.insert(start);
        while let Some((i, j)) = stack.pop() {
            members.insert((i, j));
            for nb in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
                if contact_nodes.contains(&nb) && visited.insert(nb) {
                    stack.push(nb);
                }
            }
        }

        let n = members.len() as f64;
        // Each of a node's 4 edges is exposed unless the neighbour across it
        // is also a member; shared edges drop two sides at once.
        let mut shared_pairs = 0u64;
        for &(i, j) in &members {
            if members.contains(&(i + 1, j)) {
                shared_pairs += 1;
            }
            if members.contains(&(i, j + 1)) {
                shared_pairs += 1;
            }
        }
        let exposed_edges = 4.0 * n - 2.0 * shared_pairs as f64;
        let area = n * spacing * spacing;
        let perimeter = exposed_edges * spacing;
        let width = 2.0 * area / perimeter;
        patches.push(ContactPatch {
            node_indices: members,
            area_a: area,
            perimeter_l: perimeter,
            width_b: width,
        });
    }
    patches
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ixs: &[(i64, i64)]) -> BTreeSet<(i64, i64)> {
        ixs.iter().copied().collect()
    }

    #[test]
    fn three_by_three_block() {
        let mut nodes = BTreeSet::new();
        for i in 0..3 {
            for j in 0..3 {
                nodes.insert((i, j));
            }
        }
        let patches = detect_patches(0.01, &nodes);
        assert_eq!(patches.len(), 1);
        let p = &patches[0];
        // 9 cells of 1 cm^2, 12 exposed edges, b = 2A/L.
        assert!((p.area_a - 9e-4).abs() < 1e-18);
        assert!((p.perimeter_l - 0.12).abs() < 1e-15);
        assert!((p.width_b - 0.015).abs() < 1e-15);
    }

    #[test]
    fn single_node() {
        let patches = detect_patches(0.01, &set(&[(5, -3)]));
        assert_eq!(patches.len(), 1);
        let p = &patches[0];
        assert!((p.area_a - 1e-4).abs() < 1e-18);
        assert!((p.perimeter_l - 0.04).abs() < 1e-18);
        assert!((p.width_b - 0.005).abs() < 1e-18);
    }

    #[test]
    fn diagonal_nodes_split_into_two_patches() {
        let patches = detect_patches(0.01, &set(&[(0, 0), (1, 1)]));
        assert_eq!(patches.len(), 2);
    }

    #[test]
    fn empty_input_empty_output() {
        assert!(detect_patches(0.01, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn width_identity_holds() {
        // L-shaped patch.
        let nodes = set(&[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]);
        let patches = detect_patches(0.02, &nodes);
        assert_eq!(patches.len(), 1);
        let p = &patches[0];
        let rel = (p.width_b * p.perimeter_l - 2.0 * p.area_a).abs() / (2.0 * p.area_a);
        assert!(rel < 1e-12);
    }
}
