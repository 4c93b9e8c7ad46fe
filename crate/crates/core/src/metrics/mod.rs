//! Evaluation protocol: segment-wise world-frame joint errors under
//! two-frame (W-MPJPE) and whole-segment (WA-MPJPE) alignment, and Chamfer
//! distance restricted to the camera field of view.

mod fov;
mod mpjpe;
mod report;
mod rigid;

pub use fov::{chamfer_fov, in_field_of_view, FovChamfer};
pub use mpjpe::{
    segment_bounds, segment_error, w_mpjpe, wa_mpjpe, JointTrajectory, MpjpeResult, Segment,
    SegmentError, DEFAULT_SEGMENT_LEN,
};
pub use report::{evaluate, Conventions, MetricsReport};
pub use rigid::{align, rigid_align, similarity_align, AlignmentKind, RigidTransform};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("sequence has {frames} frames; at least 2 are required")]
    TooShort { frames: usize },
    #[error("trajectory mismatch: {0}")]
    Mismatch(String),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("no points left after field-of-view filtering ({side})")]
    EmptyAfterFiltering { side: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
