use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BodyError {
    #[error("body sequence has no frames")]
    Empty,
    #[error("frame {frame}: {reason}")]
    InconsistentFrame { frame: usize, reason: String },
    #[error("foot joint index {index} out of range for {joints} joints")]
    InvalidFootJoint { index: usize, joints: usize },
    #[error("invalid sequence parameter: {0}")]
    InvalidParameter(String),
}

/// Observed 2D keypoint in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub u: f64,
    pub v: f64,
    pub confidence: f64,
}

/// Frozen body geometry of one frame. Vertices and joints carry the base
/// placement; the optimized per-frame translation is added on top.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyFrame {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub joints: Vec<Vec3>,
    pub keypoints: Vec<Keypoint>,
    /// Camera translation entering the global trajectory `T = t_cam + t`.
    pub camera_translation: Vec3,
}

/// Per-frame body geometry plus the optimization variables: one translation
/// per frame and a single global scene scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySequence {
    pub frames: Vec<BodyFrame>,
    pub foot_joints: Vec<usize>,
    pub translations: Vec<Vec3>,
    pub scale: f64,
    pub fps: f64,
}

impl BodySequence {
    pub fn new(
        frames: Vec<BodyFrame>,
        foot_joints: Vec<usize>,
        translations: Vec<Vec3>,
        scale: f64,
        fps: f64,
    ) -> Result<Self, BodyError> {
        let seq = Self {
            frames,
            foot_joints,
            translations,
            scale,
            fps,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<(), BodyError> {
        let first = self.frames.first().ok_or(BodyError::Empty)?;
        let (nv, nj) = (first.vertices.len(), first.joints.len());
        if self.translations.len() != self.frames.len() {
            return Err(BodyError::InvalidParameter(format!(
                "{} translations for {} frames",
                self.translations.len(),
                self.frames.len()
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(BodyError::InvalidParameter(format!(
                "scene scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(BodyError::InvalidParameter(format!(
                "frame rate must be positive, got {}",
                self.fps
            )));
        }
        for (t, f) in self.frames.iter().enumerate() {
            let bad = |reason: String| BodyError::InconsistentFrame { frame: t, reason };
            if f.vertices.len() != nv || f.normals.len() != nv {
                return Err(bad(format!(
                    "{} vertices / {} normals, expected {nv}",
                    f.vertices.len(),
                    f.normals.len()
                )));
            }
            if f.joints.len() != nj {
                return Err(bad(format!("{} joints, expected {nj}", f.joints.len())));
            }
            if !f.keypoints.is_empty() && f.keypoints.len() != nj {
                return Err(bad(format!(
                    "{} keypoints for {nj} joints",
                    f.keypoints.len()
                )));
            }
            if f.keypoints.iter().any(|k| !(0.0..=1.0).contains(&k.confidence)) {
                return Err(bad("keypoint confidence outside [0, 1]".into()));
            }
            if f.normals.iter().any(|n| (n.norm() - 1.0).abs() > 1e-6) {
                return Err(bad("vertex normals must be unit length".into()));
            }
        }
        if let Some(&index) = self.foot_joints.iter().find(|&&j| j >= nj) {
            return Err(BodyError::InvalidFootJoint { index, joints: nj });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.vertices.len())
    }

    pub fn joint_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.joints.len())
    }

    /// Vertex `i` of frame `t` with the frame translation applied.
    #[inline]
    pub fn posed_vertex(&self, t: usize, i: usize) -> Vec3 {
        self.frames[t].vertices[i] + self.translations[t]
    }

    #[inline]
    pub fn posed_joint(&self, t: usize, j: usize) -> Vec3 {
        self.frames[t].joints[j] + self.translations[t]
    }

    pub fn posed_vertices(&self, t: usize) -> Vec<Vec3> {
        self.frames[t]
            .vertices
            .iter()
            .map(|v| v + self.translations[t])
            .collect()
    }

    pub fn posed_joints(&self, t: usize) -> Vec<Vec3> {
        self.frames[t]
            .joints
            .iter()
            .map(|j| j + self.translations[t])
            .collect()
    }

    /// Global trajectory `T^t = t_cam^t + t^t`.
    pub fn global_translation(&self, t: usize) -> Vec3 {
        self.frames[t].camera_translation + self.translations[t]
    }

    /// Packed variables `[t0.x, t0.y, t0.z, ..., scale]`.
    pub fn pack(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.len() + 1);
        for t in &self.translations {
            out.extend_from_slice(t.as_slice());
        }
        out.push(self.scale);
        out
    }

    pub fn unpack(&mut self, x: &[f64]) {
        assert_eq!(x.len(), 3 * self.len() + 1, "packed vector length");
        for (t, chunk) in self.translations.iter_mut().zip(x.chunks_exact(3)) {
            *t = Vec3::new(chunk[0], chunk[1], chunk[2]);
        }
        self.scale = x[x.len() - 1];
    }
}
