use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rigid::{align, AlignmentKind, RigidTransform};
use super::MetricsError;
use crate::Vec3;

pub const DEFAULT_SEGMENT_LEN: usize = 100;

/// World-frame joint positions, `joints[frame][joint]`, in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTrajectory {
    pub joints: Vec<Vec<Vec3>>,
    pub fps: f64,
}

impl JointTrajectory {
    pub fn new(joints: Vec<Vec<Vec3>>, fps: f64) -> Result<Self, MetricsError> {
        let t = Self { joints, fps };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(MetricsError::InvalidParameter("frame rate must be positive".into()));
        }
        let j = self.joint_count();
        for (f, frame) in self.joints.iter().enumerate() {
            if frame.len() != j {
                return Err(MetricsError::Mismatch(format!(
                    "frame {f} has {} joints, frame 0 has {j}",
                    frame.len()
                )));
            }
            if frame.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
                return Err(MetricsError::InvalidParameter(format!("frame {f} has a non-finite joint")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn joint_count(&self) -> usize {
        self.joints.first().map_or(0, Vec::len)
    }

    /// Applies `transform` to every joint.
    pub fn transformed(&self, transform: &RigidTransform) -> Self {
        Self {
            joints: self
                .joints
                .iter()
                .map(|f| f.iter().map(|p| transform.apply(p)).collect())
                .collect(),
            fps: self.fps,
        }
    }
}

/// Half-open frame range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Consecutive segments of `segment_len` frames. A trailing remainder of at
/// least two frames forms its own segment; a single leftover frame is
/// appended to the previous segment so that every frame is covered once.
pub fn segment_bounds(frames: usize, segment_len: usize) -> Result<Vec<Segment>, MetricsError> {
    if segment_len < 2 {
        return Err(MetricsError::InvalidParameter("segment length must be at least 2".into()));
    }
    if frames < 2 {
        return Err(MetricsError::TooShort { frames });
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start < frames {
        let end = (start + segment_len).min(frames);
        if end - start == 1 {
            if let Some(last) = out.last_mut() {
                let last: &mut Segment = last;
                last.end = end;
            }
            break;
        }
        out.push(Segment { start, end });
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentError {
    pub segment: Segment,
    /// Frames × joints in the segment.
    pub joint_count: usize,
    /// Mean per-joint Euclidean error, millimeters.
    pub mpjpe_mm: f64,
    /// Root-mean-square per-joint error, millimeters. This is the quantity
    /// the least-squares fit minimizes.
    pub rms_mm: f64,
    pub per_frame_mm: Vec<f64>,
    pub transform: RigidTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpjpeResult {
    pub segments: Vec<SegmentError>,
    /// Joint-count weighted mean of the per-segment values.
    pub aggregate_mm: f64,
}

impl MpjpeResult {
    fn from_segments(segments: Vec<SegmentError>) -> Self {
        let total: usize = segments.iter().map(|s| s.joint_count).sum();
        let aggregate_mm = segments
            .iter()
            .map(|s| s.mpjpe_mm * s.joint_count as f64)
            .sum::<f64>()
            / total.max(1) as f64;
        Self {
            segments,
            aggregate_mm,
        }
    }
}

fn check_pair(pred: &JointTrajectory, gt: &JointTrajectory) -> Result<(), MetricsError> {
    pred.validate()?;
    gt.validate()?;
    if pred.len() != gt.len() {
        return Err(MetricsError::Mismatch(format!(
            "{} predicted vs {} ground-truth frames",
            pred.len(),
            gt.len()
        )));
    }
    if pred.joint_count() != gt.joint_count() {
        return Err(MetricsError::Mismatch(format!(
            "{} predicted vs {} ground-truth joints",
            pred.joint_count(),
            gt.joint_count()
        )));
    }
    if pred.len() < 2 {
        return Err(MetricsError::TooShort { frames: pred.len() });
    }
    Ok(())
}

fn stacked(t: &JointTrajectory, frames: std::ops::Range<usize>) -> Vec<Vec3> {
    t.joints[frames].iter().flatten().copied().collect()
}

/// Error of `pred` mapped through `transform` against `gt` on `segment`.
pub fn segment_error(
    pred: &JointTrajectory,
    gt: &JointTrajectory,
    segment: Segment,
    transform: RigidTransform,
) -> SegmentError {
    let mut sum = 0.0;
    let mut sq = 0.0;
    let mut per_frame_mm = Vec::with_capacity(segment.len());
    for f in segment.start..segment.end {
        let mut frame_sum = 0.0;
        for (p, g) in pred.joints[f].iter().zip(&gt.joints[f]) {
            let e = (transform.apply(p) - g).norm();
            frame_sum += e;
            sq += e * e;
        }
        sum += frame_sum;
        per_frame_mm.push(1e3 * frame_sum / pred.joint_count().max(1) as f64);
    }
    let joint_count = segment.len() * pred.joint_count();
    let n = joint_count.max(1) as f64;
    SegmentError {
        segment,
        joint_count,
        mpjpe_mm: 1e3 * sum / n,
        rms_mm: 1e3 * (sq / n).sqrt(),
        per_frame_mm,
        transform,
    }
}

fn segmented(
    pred: &JointTrajectory,
    gt: &JointTrajectory,
    segment_len: usize,
    kind: AlignmentKind,
    fit_frames: impl Fn(Segment) -> std::ops::Range<usize> + Sync,
) -> Result<MpjpeResult, MetricsError> {
    check_pair(pred, gt)?;
    let bounds = segment_bounds(pred.len(), segment_len)?;
    let segments = bounds
        .par_iter()
        .map(|&seg| {
            let range = fit_frames(seg);
            let transform = align(&stacked(pred, range.clone()), &stacked(gt, range), kind)?;
            Ok(segment_error(pred, gt, seg, transform))
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    Ok(MpjpeResult::from_segments(segments))
}

/// Per-segment error after aligning only the first two frames of each
/// segment to the ground truth.
pub fn w_mpjpe(
    pred: &JointTrajectory,
    gt: &JointTrajectory,
    segment_len: usize,
    kind: AlignmentKind,
) -> Result<MpjpeResult, MetricsError> {
    segmented(pred, gt, segment_len, kind, |s| s.start..s.start + 2)
}

/// Per-segment error after aligning all frames of each segment.
pub fn wa_mpjpe(
    pred: &JointTrajectory,
    gt: &JointTrajectory,
    segment_len: usize,
    kind: AlignmentKind,
) -> Result<MpjpeResult, MetricsError> {
    segmented(pred, gt, segment_len, kind, |s| s.start..s.end)
}
