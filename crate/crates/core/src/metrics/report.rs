use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fov::{chamfer_fov, FovChamfer};
use super::mpjpe::{w_mpjpe, wa_mpjpe, JointTrajectory, MpjpeResult};
use super::rigid::AlignmentKind;
use super::MetricsError;
use crate::scene::CameraFrame;
use crate::Vec3;

/// How the numbers in a report were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub alignment: AlignmentKind,
    pub segment_len: usize,
    pub w_mpjpe_fit: String,
    pub wa_mpjpe_fit: String,
    pub chamfer: String,
    pub units: String,
}

impl Conventions {
    pub fn new(alignment: AlignmentKind, segment_len: usize) -> Self {
        Self {
            alignment,
            segment_len,
            w_mpjpe_fit: "joints of the first two frames of each segment".into(),
            wa_mpjpe_fit: "all joints of each segment".into(),
            chamfer: "0.5 * (mean NN distance pred->gt + mean NN distance gt->pred), \
                      Euclidean, both clouds restricted to the camera field of view"
                .into(),
            units: "MPJPE in millimeters, Chamfer in meters".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub w_mpjpe: MpjpeResult,
    pub wa_mpjpe: MpjpeResult,
    pub chamfer: Option<FovChamfer>,
    pub conventions: Conventions,
}

impl MetricsReport {
    /// Plain-text table of per-segment and aggregate values.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>8} {:>8} {:>14} {:>14}", "start", "end", "W-MPJPE [mm]", "WA-MPJPE [mm]");
        for (w, wa) in self.w_mpjpe.segments.iter().zip(&self.wa_mpjpe.segments) {
            let _ = writeln!(
                s,
                "{:>8} {:>8} {:>14.2} {:>14.2}",
                w.segment.start, w.segment.end, w.mpjpe_mm, wa.mpjpe_mm
            );
        }
        let _ = writeln!(
            s,
            "{:>17} {:>14.2} {:>14.2}",
            "all", self.w_mpjpe.aggregate_mm, self.wa_mpjpe.aggregate_mm
        );
        if let Some(c) = &self.chamfer {
            let _ = writeln!(s, "Chamfer (FOV): {:.4} m over {} / {} points", c.distance, c.pred_kept, c.gt_kept);
        }
        s
    }
}

/// Both trajectory metrics and, when clouds are given, the field-of-view
/// Chamfer distance.
pub fn evaluate(
    pred: &JointTrajectory,
    gt: &JointTrajectory,
    segment_len: usize,
    alignment: AlignmentKind,
    clouds: Option<(&[Vec3], &[Vec3], &[CameraFrame])>,
) -> Result<MetricsReport, MetricsError> {
    let w = w_mpjpe(pred, gt, segment_len, alignment)?;
    let wa = wa_mpjpe(pred, gt, segment_len, alignment)?;
    let chamfer = clouds
        .map(|(p, g, frames)| chamfer_fov(p, g, frames))
        .transpose()?;
    Ok(MetricsReport {
        w_mpjpe: w,
        wa_mpjpe: wa,
        chamfer,
        conventions: Conventions::new(alignment, segment_len),
    })
}
