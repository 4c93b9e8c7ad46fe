//! Body sequence container and the metric alignment terms: 2D joint
//! reprojection and Chamfer distance between camera-facing vertices and an
//! observed human point set.

mod body;
mod losses;

pub use body::{BodyError, BodyFrame, BodySequence, Keypoint};
pub use losses::{
    camera_facing_vertices, loss_chamfer, loss_j2d, ChamferLoss, J2dLoss, DEFAULT_FACING_ANGLE_DEG,
    MIN_KEYPOINT_CONFIDENCE,
};
