//! Deformable soil contact model.
//!
//! The terrain is a sparse height field of nodes with plastic sinkage
//! memory. Normal pressure follows the Bekker-Wong law with a velocity
//! damping term, tangential stress is capped by Mohr-Coulomb and mobilized
//! through the Janosi-Hanamoto slip relation. Forces are integrated per
//! node over the node's cell area.

mod forces;
mod grid;
mod params;
mod patch;

pub use forces::{
    bekker_pressure, janosi_shear, node_pressure, resultant_wrench, shear_limit, step_contact,
    BodyTag, ContactSample, Wrench,
};
pub use grid::{NodeState, TerrainGrid};
pub use params::SoilParams;
pub use patch::{detect_patches, ContactPatch};

/// Errors from soil construction and force evaluation.
#[derive(Debug, thiserror::Error)]
pub enum SoilError {
    #[error("invalid soil parameter: {0}")]
    Parameter(String),
}
