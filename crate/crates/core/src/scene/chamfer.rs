use super::{SceneError, SpatialHash};
use crate::Vec3;

/// Mean Euclidean distance from each point of `from` to its nearest point in
/// `to`.
pub fn mean_nearest_distance(from: &[Vec3], to: &[Vec3]) -> Result<f64, SceneError> {
    if from.is_empty() || to.is_empty() {
        return Err(SceneError::EmptySet);
    }
    let index = SpatialHash::with_auto_cell(to);
    let sum: f64 = from
        .iter()
        .map(|p| index.nearest(p).map(|(_, d2)| d2.sqrt()).unwrap_or(0.0))
        .sum();
    Ok(sum / from.len() as f64)
}

/// Symmetric Chamfer distance: the two directed mean nearest-neighbour
/// distances, averaged.
pub fn chamfer(a: &[Vec3], b: &[Vec3]) -> Result<f64, SceneError> {
    Ok(0.5 * (mean_nearest_distance(a, b)? + mean_nearest_distance(b, a)?))
}
