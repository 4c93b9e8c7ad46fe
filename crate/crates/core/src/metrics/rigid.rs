use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentKind {
    #[default]
    Rigid,
    Similarity,
}

/// `x ↦ scale · R x + t`; `scale` is 1 for rigid fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
    pub scale: f64,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.scale * (self.rotation * p) + self.translation
    }
}

/// Least-squares rotation and translation taking `a` onto `b`.
pub fn rigid_align(a: &[Vec3], b: &[Vec3]) -> Result<RigidTransform, MetricsError> {
    align(a, b, AlignmentKind::Rigid)
}

/// Least-squares similarity (Umeyama) taking `a` onto `b`.
pub fn similarity_align(a: &[Vec3], b: &[Vec3]) -> Result<RigidTransform, MetricsError> {
    align(a, b, AlignmentKind::Similarity)
}

pub fn align(a: &[Vec3], b: &[Vec3], kind: AlignmentKind) -> Result<RigidTransform, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::Mismatch(format!(
            "{} source and {} target points",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 3 {
        return Err(MetricsError::DegenerateConfiguration(format!(
            "{} correspondences; at least 3 are required",
            a.len()
        )));
    }
    let n = a.len() as f64;
    let ca = a.iter().sum::<Vec3>() / n;
    let cb = b.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    let mut var_a = 0.0;
    for (p, q) in a.iter().zip(b) {
        let (pa, qb) = (p - ca, q - cb);
        h += pa * qb.transpose();
        var_a += pa.norm_squared();
    }

    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let s = svd.singular_values;
    let mut sorted = [s[0], s[1], s[2]];
    sorted.sort_by(|x, y| y.total_cmp(x));
    if !(sorted[0] > 0.0) || sorted[1] <= 1e-12 * sorted[0] {
        return Err(MetricsError::DegenerateConfiguration(
            "cross-covariance has rank below 2".into(),
        ));
    }

    let v = v_t.transpose();
    let mut d = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        let smallest = (0..3).min_by(|&i, &j| s[i].total_cmp(&s[j])).expect("three values");
        d[(smallest, smallest)] = -1.0;
    }
    let rotation = v * d * u.transpose();
    let scale = match kind {
        AlignmentKind::Rigid => 1.0,
        AlignmentKind::Similarity => {
            if var_a <= 0.0 {
                return Err(MetricsError::DegenerateConfiguration("source points coincide".into()));
            }
            (0..3).map(|i| d[(i, i)] * s[i]).sum::<f64>() / var_a
        }
    };
    Ok(RigidTransform {
        rotation,
        translation: cb - scale * (rotation * ca),
        scale,
    })
}
