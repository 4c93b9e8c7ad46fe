//! Scene geometry shared by every later stage: pinhole cameras, oriented point
//! clouds, TSDF fusion with trilinear queries, nearest-neighbour search and
//! Chamfer distance.

mod camera;
mod chamfer;
mod cloud;
mod spatial_hash;
mod tsdf;

pub use camera::{CameraFrame, Projection, MIN_CAMERA_DEPTH};
pub use chamfer::{chamfer, mean_nearest_distance};
pub use cloud::{Aabb, ScenePointCloud};
pub use spatial_hash::SpatialHash;
pub use tsdf::{fuse_tsdf, MetricSample, SdfSample, TsdfVolume};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("point is behind the camera (camera-frame z = {depth})")]
    BehindCamera { depth: f64 },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("point cloud bounding box has zero extent along axis {axis}")]
    DegenerateCloud { axis: usize },
    #[error("invalid TSDF parameter: {0}")]
    InvalidParameter(String),
    #[error("point set is empty")]
    EmptySet,
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
}
