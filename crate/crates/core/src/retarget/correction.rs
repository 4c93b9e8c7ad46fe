use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RetargetError;
use crate::scene::TsdfVolume;
use crate::Vec3;

/// Width of the final bisection bracket, meters.
pub const BISECTION_TOLERANCE: f64 = 1e-4;
const MIN_GRADIENT_NORM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionParams {
    /// Metric scale of the volume.
    pub scale: f64,
    /// Required minimum signed distance; negative values tolerate a shallow
    /// overlap.
    pub safety: f64,
    /// Vertices closer than this (metric) contribute to the direction.
    pub near_band: f64,
    pub max_eta: f64,
}

impl CorrectionParams {
    /// Near band of half the metric truncation.
    pub fn for_volume(volume: &TsdfVolume, scale: f64, safety: f64, max_eta: f64) -> Self {
        Self {
            scale,
            safety,
            near_band: (scale * volume.truncation() / 2.0).max(0.0),
            max_eta,
        }
    }

    fn validate(&self) -> Result<(), RetargetError> {
        let bad = |m: &str| Err(RetargetError::InvalidParameter(m.to_string()));
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad("scale must be positive");
        }
        if !(self.safety.is_finite() && self.safety < 0.0) {
            return bad("safety margin must be negative");
        }
        if !(self.near_band.is_finite() && self.near_band >= 0.0) {
            return bad("near band must be non-negative");
        }
        if !(self.max_eta.is_finite() && self.max_eta > 0.0) {
            return bad("max_eta must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    /// Unit direction; zero when no correction was needed.
    pub direction: Vec3,
    pub magnitude: f64,
    pub offset: Vec3,
    pub pre_min_sdf: f64,
    pub post_min_sdf: f64,
    /// Predicate evaluations spent in the line search.
    pub iterations: usize,
}

fn min_sdf(volume: &TsdfVolume, vertices: &[Vec3], offset: Vec3, scale: f64) -> f64 {
    vertices
        .par_iter()
        .map(|v| volume.query_metric(&(v + offset), scale).distance)
        .reduce(|| f64::INFINITY, f64::min)
}

/// Smallest translation along the mean SDF gradient of the near-surface
/// vertices that lifts every vertex to at least `params.safety`.
///
/// The search grows the step geometrically from one metric voxel until it
/// is feasible, bisects the last bracket to [`BISECTION_TOLERANCE`], and
/// then confirms that stepping back by twice the tolerance is infeasible,
/// walking further down when the predicate is not monotone.
pub fn correct_penetration(
    volume: &TsdfVolume,
    vertices: &[Vec3],
    params: &CorrectionParams,
) -> Result<CorrectionResult, RetargetError> {
    params.validate()?;
    if vertices.is_empty() {
        return Err(RetargetError::InvalidParameter("no robot vertices".into()));
    }
    let scale = params.scale;
    let samples: Vec<_> = vertices.par_iter().map(|v| volume.query_metric(v, scale)).collect();
    let pre = samples.iter().map(|s| s.distance).fold(f64::INFINITY, f64::min);
    if pre >= params.safety {
        return Ok(CorrectionResult {
            direction: Vec3::zeros(),
            magnitude: 0.0,
            offset: Vec3::zeros(),
            pre_min_sdf: pre,
            post_min_sdf: pre,
            iterations: 0,
        });
    }

    let near: Vec<Vec3> = samples
        .iter()
        .filter(|s| s.distance < params.near_band)
        .map(|s| s.gradient)
        .collect();
    let mean = near.iter().sum::<Vec3>() / near.len().max(1) as f64;
    if mean.norm() < MIN_GRADIENT_NORM {
        return Err(RetargetError::ZeroGradient);
    }
    let u = mean.normalize();

    let mut evals = 0usize;
    let mut feasible = |eta: f64| {
        evals += 1;
        min_sdf(volume, vertices, eta * u, scale) >= params.safety
    };

    let mut lo = 0.0;
    let mut hi = (scale * volume.voxel_size()).min(params.max_eta);
    loop {
        if feasible(hi) {
            break;
        }
        if hi >= params.max_eta {
            return Err(RetargetError::NoFeasibleOffset {
                max_eta: params.max_eta,
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(params.max_eta);
    }
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    loop {
        let back = hi - 2.0 * BISECTION_TOLERANCE;
        if back <= 0.0 || !feasible(back) {
            break;
        }
        hi = back;
        while hi - BISECTION_TOLERANCE > 0.0 && feasible(hi - BISECTION_TOLERANCE) {
            hi -= BISECTION_TOLERANCE;
        }
    }

    let offset = hi * u;
    Ok(CorrectionResult {
        direction: u,
        magnitude: hi,
        offset,
        pre_min_sdf: pre,
        post_min_sdf: min_sdf(volume, vertices, offset, scale),
        iterations: evals,
    })
}
