//! Optimization core for reconstructing metric, physically plausible human
//! motion together with its surrounding scene.
//!
//! The crate is organised by stage:
//!
//! * [`scene`]: camera projection, oriented point clouds, TSDF fusion and
//!   trilinear signed-distance queries, Chamfer distance.
//! * [`contact`]: depth-edge guided contact band extraction on images and the
//!   scene-point / body-vertex correspondences derived from it.
//! * [`alignment`]: the body sequence container and the 2D reprojection and
//!   camera-facing Chamfer alignment terms.
//! * [`optimizer`]: contact, penetration, smoothness and foot-snapping terms,
//!   their weighted sum and the descent loop over per-frame translations and
//!   the global scene scale.
//! * [`retarget`]: terrain sampling, interaction-mesh Laplacian energy and the
//!   TSDF translation correction applied to retargeted robot geometry.
//! * [`metrics`]: segment-wise world-frame MPJPE variants and field-of-view
//!   restricted Chamfer distance.
//! * [`io`] and [`synth`]: file formats and a deterministic synthetic scene
//!   generator used by tests and demos.

pub mod alignment;
pub mod contact;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod optimizer;
pub mod raster;
pub mod retarget;
pub mod scene;
pub mod synth;

/// Three-component vector in meters unless stated otherwise.
pub type Vec3 = nalgebra::Vector3<f64>;
