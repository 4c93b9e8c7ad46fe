//! Depth-edge guided contact prediction.
//!
//! The silhouette boundary of the human mask is intersected with the
//! complement of a dilated depth-discontinuity map; what survives is the
//! contact band, where the body meets the scene without a depth jump. Scene
//! points projecting into the band become contact candidates and are paired
//! with their nearest body vertex.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{BinaryImage, DepthMap, RasterError};
use crate::scene::{CameraFrame, ScenePointCloud, SpatialHash};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("frame {frame}: contact references vertex {vertex} but the body has {count} vertices")]
    InvalidVertex {
        frame: usize,
        vertex: usize,
        count: usize,
    },
    #[error("frame {frame}: {reason}")]
    SelfCheck { frame: usize, reason: String },
}

/// Tunables for band extraction and correspondence search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    /// Square dilation radius (pixels) of the depth-edge exclusion zone.
    pub excl_radius: usize,
    /// Square dilation radius (pixels) applied to the raw band.
    pub band_radius: usize,
    /// Relative depth jump marking a depth edge.
    pub rel_threshold: f64,
    /// Maximum gap (m) between a candidate's depth and the depth map.
    pub depth_tol: f64,
    /// Maximum 3D distance (m) between a candidate and its body vertex.
    pub corr_radius: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            excl_radius: 3,
            band_radius: 1,
            rel_threshold: 0.1,
            depth_tol: 0.05,
            corr_radius: 0.15,
        }
    }
}

/// A scene point (scene-native coordinates) paired with a body vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPair {
    pub point: Vec3,
    pub vertex: usize,
}

/// Contacts of one frame together with the band pixels they came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameContacts {
    pub frame: usize,
    pub pairs: Vec<ContactPair>,
    /// Set pixels `[x, y]` of the dilated contact band.
    pub band: Vec<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactSet {
    pub frames: Vec<FrameContacts>,
}

impl ContactSet {
    pub fn total(&self) -> usize {
        self.frames.iter().map(|f| f.pairs.len()).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.pairs.len()).collect()
    }
}

/// Morphological gradient with a 3x3 square: `dilate(mask) & !erode(mask)`.
pub fn silhouette_boundary(mask: &BinaryImage) -> BinaryImage {
    mask.dilate(1)
        .and_not(&mask.erode(1))
        .expect("same-size images")
}

/// Marks pixels whose depth differs from a 4-neighbour by more than
/// `rel_threshold` times their own depth, pixels with an invalid 4-neighbour,
/// and invalid pixels themselves.
pub fn depth_edges(depth: &DepthMap, rel_threshold: f64) -> BinaryImage {
    let (w, h) = depth.size();
    BinaryImage::from_fn(w, h, |x, y| {
        if !depth.is_valid(x, y) {
            return true;
        }
        let d = depth.get(x, y) as f64;
        let limit = rel_threshold * d;
        let mut neighbours = [None; 4];
        if x > 0 {
            neighbours[0] = Some((x - 1, y));
        }
        if x + 1 < w {
            neighbours[1] = Some((x + 1, y));
        }
        if y > 0 {
            neighbours[2] = Some((x, y - 1));
        }
        if y + 1 < h {
            neighbours[3] = Some((x, y + 1));
        }
        neighbours.into_iter().flatten().any(|(nx, ny)| {
            !depth.is_valid(nx, ny) || (depth.get(nx, ny) as f64 - d).abs() > limit
        })
    })
}

/// `dilate(E_human & !dilate(E_depth, excl_radius), band_radius)`.
pub fn contact_band(
    human_edges: &BinaryImage,
    depth_edges: &BinaryImage,
    excl_radius: usize,
    band_radius: usize,
) -> Result<BinaryImage, ContactError> {
    let exclusion = depth_edges.dilate(excl_radius);
    let raw = human_edges.and_not(&exclusion)?;
    Ok(raw.dilate(band_radius))
}

/// Contact band of one frame from its mask and depth map.
pub fn frame_band(
    mask: &BinaryImage,
    depth: &DepthMap,
    params: &ContactParams,
) -> Result<BinaryImage, ContactError> {
    if mask.size() != depth.size() {
        return Err(RasterError::SizeMismatch {
            expected: mask.size(),
            found: depth.size(),
        }
        .into());
    }
    contact_band(
        &silhouette_boundary(mask),
        &depth_edges(depth, params.rel_threshold),
        params.excl_radius,
        params.band_radius,
    )
}

/// Scene points projecting into `band` (and agreeing with the frame's depth
/// map, if present) paired with their 3D-nearest human vertex when it lies
/// within `corr_radius`.
pub fn extract_scene_contacts(
    frame_index: usize,
    band: &BinaryImage,
    cloud: &ScenePointCloud,
    frame: &CameraFrame,
    human_vertices: &[Vec3],
    params: &ContactParams,
) -> Result<FrameContacts, ContactError> {
    if band.size() != (frame.width, frame.height) {
        return Err(RasterError::SizeMismatch {
            expected: (frame.width, frame.height),
            found: band.size(),
        }
        .into());
    }
    let band_pixels: Vec<[u32; 2]> = band
        .set_pixels()
        .map(|(x, y)| [x as u32, y as u32])
        .collect();
    let mut out = FrameContacts {
        frame: frame_index,
        pairs: Vec::new(),
        band: band_pixels,
    };
    if out.band.is_empty() || human_vertices.is_empty() {
        return Ok(out);
    }
    let index = SpatialHash::new(human_vertices, params.corr_radius.max(1e-6));
    for p in cloud.points() {
        let Some(((px, py), depth)) = frame.visible_pixel(p) else {
            continue;
        };
        if !band.get(px, py) {
            continue;
        }
        if let Some(map) = &frame.depth {
            if !map.is_valid(px, py) || (map.get(px, py) as f64 - depth).abs() > params.depth_tol {
                continue;
            }
        }
        if let Some((vertex, d2)) = index.nearest(p) {
            if d2.sqrt() < params.corr_radius {
                out.pairs.push(ContactPair { point: *p, vertex });
            }
        }
    }
    Ok(out)
}

impl FrameContacts {
    /// Re-checks every pair: vertex index in range, projection inside the
    /// stored band and correspondence distance below `corr_radius`.
    pub fn self_check(
        &self,
        frame: &CameraFrame,
        human_vertices: &[Vec3],
        corr_radius: f64,
    ) -> Result<(), ContactError> {
        let band: std::collections::HashSet<[u32; 2]> = self.band.iter().copied().collect();
        for pair in &self.pairs {
            let v = human_vertices
                .get(pair.vertex)
                .ok_or(ContactError::InvalidVertex {
                    frame: self.frame,
                    vertex: pair.vertex,
                    count: human_vertices.len(),
                })?;
            if (pair.point - v).norm() >= corr_radius {
                return Err(ContactError::SelfCheck {
                    frame: self.frame,
                    reason: format!("pair with vertex {} exceeds the correspondence radius", pair.vertex),
                });
            }
            let inside = frame
                .visible_pixel(&pair.point)
                .is_some_and(|((x, y), _)| band.contains(&[x as u32, y as u32]));
            if !inside {
                return Err(ContactError::SelfCheck {
                    frame: self.frame,
                    reason: format!("scene point {:?} projects outside the band", pair.point),
                });
            }
        }
        Ok(())
    }
}
