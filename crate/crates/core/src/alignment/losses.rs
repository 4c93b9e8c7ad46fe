use rayon::prelude::*;

use super::{BodyError, BodySequence};
use crate::loss::LossEval;
use crate::scene::{CameraFrame, SpatialHash};
use crate::Vec3;

/// Vertices whose normal is within this angle of the direction to the camera
/// are camera-facing.
pub const DEFAULT_FACING_ANGLE_DEG: f64 = 65.0;

/// Keypoints below this confidence are ignored by the reprojection term.
pub const MIN_KEYPOINT_CONFIDENCE: f64 = 0.05;

/// Indices of vertices whose normal makes an angle below `max_angle_deg`
/// with the direction from the vertex to the camera center.
pub fn camera_facing_vertices(
    vertices: &[Vec3],
    normals: &[Vec3],
    frame: &CameraFrame,
    max_angle_deg: f64,
) -> Vec<usize> {
    let center = frame.center();
    let cos_limit = max_angle_deg.to_radians().cos();
    vertices
        .iter()
        .zip(normals)
        .enumerate()
        .filter_map(|(i, (v, n))| {
            let to_cam = center - v;
            let len = to_cam.norm();
            (len > 0.0 && n.dot(&to_cam) > cos_limit * len).then_some(i)
        })
        .collect()
}

fn check_frames(seq: &BodySequence, frames: usize, what: &str) -> Result<(), BodyError> {
    if frames != seq.len() {
        return Err(BodyError::InvalidParameter(format!(
            "{frames} {what} for {} body frames",
            seq.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct J2dLoss {
    pub eval: LossEval,
    /// Confident joints that projected behind their camera and were dropped.
    pub behind_camera: usize,
    pub weight_sum: f64,
}

/// Confidence-weighted mean squared pixel error between projected posed
/// joints and observed keypoints.
pub fn loss_j2d(seq: &BodySequence, frames: &[CameraFrame]) -> Result<J2dLoss, BodyError> {
    check_frames(seq, frames.len(), "cameras")?;
    let per_frame: Vec<(f64, Vec3, f64, usize)> = (0..seq.len())
        .into_par_iter()
        .map(|t| {
            let body = &seq.frames[t];
            let mut sum = 0.0;
            let mut grad = Vec3::zeros();
            let mut wsum = 0.0;
            let mut behind = 0;
            for (j, kp) in body.keypoints.iter().enumerate() {
                if kp.confidence < MIN_KEYPOINT_CONFIDENCE {
                    continue;
                }
                let x = seq.posed_joint(t, j);
                match frames[t].project_with_jacobian(&x) {
                    Ok((proj, jac)) => {
                        let r = proj.pixel - nalgebra::Vector2::new(kp.u, kp.v);
                        sum += kp.confidence * r.norm_squared();
                        grad += jac.transpose() * r * (2.0 * kp.confidence);
                        wsum += kp.confidence;
                    }
                    Err(_) => behind += 1,
                }
            }
            (sum, grad, wsum, behind)
        })
        .collect();

    let weight_sum: f64 = per_frame.iter().map(|f| f.2).sum();
    let behind_camera = per_frame.iter().map(|f| f.3).sum();
    let mut eval = LossEval::zero(seq.len());
    if weight_sum > 0.0 {
        for (t, (sum, grad, _, _)) in per_frame.iter().enumerate() {
            eval.value += sum / weight_sum;
            eval.grad_translations[t] = grad / weight_sum;
        }
    }
    Ok(J2dLoss {
        eval,
        behind_camera,
        weight_sum,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChamferLoss {
    pub eval: LossEval,
    pub frames_used: usize,
    pub skipped_no_facing: usize,
    pub skipped_no_points: usize,
}

/// Per-frame symmetric squared Chamfer distance between the camera-facing
/// posed vertices and the observed human points, averaged over frames. Each
/// direction is a mean of squared nearest distances; the two directions are
/// averaged. Nearest-neighbour assignments are fixed within one evaluation.
pub fn loss_chamfer(
    seq: &BodySequence,
    human_points: &[Vec<Vec3>],
    frames: &[CameraFrame],
    max_angle_deg: f64,
) -> Result<ChamferLoss, BodyError> {
    check_frames(seq, frames.len(), "cameras")?;
    check_frames(seq, human_points.len(), "human point sets")?;

    enum Outcome {
        Used(f64, Vec3),
        NoFacing,
        NoPoints,
    }

    let per_frame: Vec<Outcome> = (0..seq.len())
        .into_par_iter()
        .map(|t| {
            let observed = &human_points[t];
            if observed.is_empty() {
                return Outcome::NoPoints;
            }
            let posed = seq.posed_vertices(t);
            let facing = camera_facing_vertices(&posed, &seq.frames[t].normals, &frames[t], max_angle_deg);
            if facing.is_empty() {
                return Outcome::NoFacing;
            }
            let body: Vec<Vec3> = facing.iter().map(|&i| posed[i]).collect();
            let obs_index = SpatialHash::with_auto_cell(observed);
            let body_index = SpatialHash::with_auto_cell(&body);

            let mut fwd = 0.0;
            let mut fwd_grad = Vec3::zeros();
            for x in &body {
                let (j, d2) = obs_index.nearest(x).expect("non-empty");
                fwd += d2;
                fwd_grad += 2.0 * (x - observed[j]);
            }
            let mut bwd = 0.0;
            let mut bwd_grad = Vec3::zeros();
            for p in observed {
                let (i, d2) = body_index.nearest(p).expect("non-empty");
                bwd += d2;
                bwd_grad += 2.0 * (body[i] - p);
            }
            let (nb, no) = (body.len() as f64, observed.len() as f64);
            let value = 0.5 * (fwd / nb + bwd / no);
            let grad = 0.5 * (fwd_grad / nb + bwd_grad / no);
            Outcome::Used(value, grad)
        })
        .collect();

    let frames_used = per_frame.iter().filter(|o| matches!(o, Outcome::Used(..))).count();
    let mut out = ChamferLoss {
        eval: LossEval::zero(seq.len()),
        frames_used,
        skipped_no_facing: per_frame.iter().filter(|o| matches!(o, Outcome::NoFacing)).count(),
        skipped_no_points: per_frame.iter().filter(|o| matches!(o, Outcome::NoPoints)).count(),
    };
    if frames_used == 0 {
        return Ok(out);
    }
    let n = frames_used as f64;
    for (t, o) in per_frame.iter().enumerate() {
        if let Outcome::Used(v, g) = o {
            out.eval.value += v / n;
            out.eval.grad_translations[t] = g / n;
        }
    }
    Ok(out)
}
