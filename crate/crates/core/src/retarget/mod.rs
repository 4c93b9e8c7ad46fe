//! Geometry layer of mesh-based retargeting: terrain sampling around the
//! performer, Delaunay interaction meshes with their Laplacian deformation
//! energy, and the TSDF translation correction for penetrating robot
//! geometry.

mod correction;
mod delaunay;
mod mesh;
mod sampling;

pub use correction::{correct_penetration, CorrectionParams, CorrectionResult, BISECTION_TOLERANCE};
pub use delaunay::{delaunay_tetrahedralize, tetrahedra_edges, Tetrahedralization};
pub use mesh::{build_interaction_mesh, laplacian_energy, InteractionMesh};
pub use sampling::{farthest_point_sampling, sample_terrain, NodeRole, TaggedPoint, TerrainSample};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetargetError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("expected {expected} nodes, got {found}")]
    NodeCountMismatch { expected: usize, found: usize },
    #[error("no offset up to {max_eta} m clears the safety margin")]
    NoFeasibleOffset { max_eta: f64 },
    #[error("averaged SDF gradient vanishes; no correction direction")]
    ZeroGradient,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
