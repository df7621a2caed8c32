use std::collections::BTreeMap;
use std::io::Write;

use super::SoilError;

/// Per-node deformation memory. Nodes that were never touched are not
/// stored; an absent node means zero plastic sinkage and zero shear memory.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeState {
    /// Deepest historical penetration below the rest surface (m), never decreases.
    pub plastic_sinkage: f64,
    /// Accumulated tangential slip displacement while in contact (m).
    pub shear_j: f64,
    /// Whether the node carried a penetrating sample on the last step.
    pub in_contact: bool,
}

/// Sparse height-field terrain. Node `(i, j)` sits at world
/// `(i * spacing + origin.0, j * spacing + origin.1)`; only touched nodes
/// are stored, in a sorted map so iteration order is deterministic.
#[derive(Debug, Clone)]
pub struct TerrainGrid {
    spacing: f64,
    origin: (f64, f64),
    rest_height: f64,
    half_extent: (i64, i64),
    nodes: BTreeMap<(i64, i64), NodeState>,
}

impl TerrainGrid {
    /// Fresh grid centred on the origin covering `extent_x` by `extent_y`.
    pub fn new(
        extent_x: f64,
        extent_y: f64,
        spacing: f64,
        rest_height: f64,
    ) -> Result<Self, SoilError> {
        if !(extent_x > 0.0) || !(extent_y > 0.0) {
            return Err(SoilError::Parameter(format!(
                "grid extents must be > 0, got {extent_x} x {extent_y}"
            )));
        }
        if !(spacing > 0.0) {
            return Err(SoilError::Parameter(format!("grid spacing must be > 0, got {spacing}")));
        }
        let hx = ((extent_x / 2.0) / spacing).ceil() as i64;
        let hy = ((extent_y / 2.0) / spacing).ceil() as i64;
        Ok(TerrainGrid {
            spacing,
            origin: (0.0, 0.0),
            rest_height,
            half_extent: (hx.max(1), hy.max(1)),
            nodes: BTreeMap::new(),
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn rest_height(&self) -> f64 {
        self.rest_height
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nearest node index for a world position; exact midpoints go to the
    /// lower index. Indices clamp to the grid extents.
    pub fn node_index(&self, x: f64, y: f64) -> (i64, i64) {
        let i = nearest_low((x - self.origin.0) / self.spacing);
        let j = nearest_low((y - self.origin.1) / self.spacing);
        (
            i.clamp(-self.half_extent.0, self.half_extent.0),
            j.clamp(-self.half_extent.1, self.half_extent.1),
        )
    }

    /// World position of a node.
    pub fn node_position(&self, idx: (i64, i64)) -> (f64, f64) {
        (
            self.origin.0 + idx.0 as f64 * self.spacing,
            self.origin.1 + idx.1 as f64 * self.spacing,
        )
    }

    /// Current surface height at a world position: rest height minus the
    /// nearest node's plastic sinkage. Untouched terrain returns rest height.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let idx = self.node_index(x, y);
        self.rest_height - self.node(idx).plastic_sinkage
    }

    /// Node state, defaulting to pristine if never touched.
    pub fn node(&self, idx: (i64, i64)) -> NodeState {
        self.nodes.get(&idx).copied().unwrap_or_default()
    }

    pub(crate) fn node_mut(&mut self, idx: (i64, i64)) -> &mut NodeState {
        self.nodes.entry(idx).or_default()
    }

    /// Iterate stored nodes in index order.
    pub fn nodes(&self) -> impl Iterator<Item = (&(i64, i64), &NodeState)> {
        self.nodes.iter()
    }

    pub(crate) fn nodes_mut(&mut self) -> impl Iterator<Item = (&(i64, i64), &mut NodeState)> {
        self.nodes.iter_mut()
    }

    /// Dump stored node state as CSV rows `i,j,plastic_sinkage,shear_j`.
    pub fn dump_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,plastic_sinkage,shear_j")?;
        for ((i, j), n) in &self.nodes {
            writeln!(w, "{},{},{},{}", i, j, n.plastic_sinkage, n.shear_j)?;
        }
        Ok(())
    }
}

/// Round to nearest integer with exact ties going down.
fn nearest_low(t: f64) -> i64 {
    (t - 0.5).ceil() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_grid_is_flat() {
        let g = TerrainGrid::new(4.0, 1.0, 0.01, 0.0).unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.height_at(0.0, 0.0), 0.0);
        assert_eq!(g.height_at(1.234, -0.3), 0.0);
        assert!((g.spacing() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_spacing_rejected() {
        assert!(TerrainGrid::new(4.0, 1.0, 0.0, 0.0).is_err());
        assert!(TerrainGrid::new(-1.0, 1.0, 0.01, 0.0).is_err());
    }

    #[test]
    fn height_reflects_plastic_sinkage() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        g.node_mut((0, 0)).plastic_sinkage = 0.008;
        assert!((g.height_at(0.0, 0.0) - (-0.008)).abs() < 1e-15);
        // A query nearer to a pristine neighbour is unaffected.
        assert_eq!(g.height_at(0.012, 0.0), 0.0);
    }

    #[test]
    fn midpoint_ties_go_to_lower_index() {
        let g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        assert_eq!(g.node_index(0.005, 0.0).0, 0);
        assert_eq!(g.node_index(0.0151, 0.0).0, 2);
        assert_eq!(g.node_index(-0.005, 0.0).0, -1);
        assert_eq!(g.node_index(0.045, 0.0).0, 4);
        assert_eq!(g.node_index(-0.045, 0.0).0, -5);
    }

    #[test]
    fn indices_clamp_to_extents() {
        let g = TerrainGrid::new(1.0, 0.2, 0.01, 0.0).unwrap();
        assert_eq!(g.node_index(100.0, 100.0), (50, 10));
        assert_eq!(g.node_index(-100.0, -100.0), (-50, -10));
    }

    #[test]
    fn csv_dump_sorted_and_headed() {
        let mut g = TerrainGrid::new(1.0, 1.0, 0.01, 0.0).unwrap();
        g.node_mut((2, 0)).plastic_sinkage = 0.002;
        g.node_mut((-1, 3)).plastic_sinkage = 0.001;
        let mut buf = Vec::new();
        g.dump_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,plastic_sinkage,shear_j");
        assert_eq!(lines[1], "-1,3,0.001,0");
        assert_eq!(lines[2], "2,0,0.002,0");
    }
}
