use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::scene::{chamfer, CameraFrame};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FovChamfer {
    pub distance: f64,
    pub pred_kept: usize,
    pub gt_kept: usize,
}

/// True when `x` projects in front of and inside the image of at least one
/// frame.
pub fn in_field_of_view(x: &Vec3, frames: &[CameraFrame]) -> bool {
    frames.iter().any(|f| f.visible_pixel(x).is_some())
}

/// Symmetric Chamfer distance between the parts of two pre-aligned clouds
/// seen by at least one camera.
pub fn chamfer_fov(
    pred: &[Vec3],
    gt: &[Vec3],
    frames: &[CameraFrame],
) -> Result<FovChamfer, MetricsError> {
    let keep = |cloud: &[Vec3]| -> Vec<Vec3> {
        cloud.iter().copied().filter(|p| in_field_of_view(p, frames)).collect()
    };
    let p = keep(pred);
    let g = keep(gt);
    if p.is_empty() {
        return Err(MetricsError::EmptyAfterFiltering { side: "prediction" });
    }
    if g.is_empty() {
        return Err(MetricsError::EmptyAfterFiltering { side: "ground truth" });
    }
    let distance = chamfer(&p, &g).expect("both sides non-empty");
    Ok(FovChamfer {
        distance,
        pred_kept: p.len(),
        gt_kept: g.len(),
    })
}
