use super::{ScenePointCloud, SceneError};
use crate::Vec3;

/// Axis-aligned grid of truncated signed distances.
///
/// Samples live on grid nodes `origin + (i, j, k) * voxel_size`; the flat
/// index is x-fastest: `i + nx * (j + ny * k)`. A node with weight 0 was never
/// reached by fusion and stores `+truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct TsdfVolume {
    origin: Vec3,
    voxel_size: f64,
    dims: [usize; 3],
    truncation: f64,
    values: Vec<f32>,
    weights: Vec<f32>,
}

/// Result of a trilinear query in the volume's own (scene-native) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdfSample {
    pub distance: f64,
    pub gradient: Vec3,
    pub observed: bool,
}

/// Query of a scaled copy of the volume: distances and gradients are metric
/// and `d_scale` is the derivative of the distance with respect to the scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub distance: f64,
    pub gradient: Vec3,
    pub d_scale: f64,
    pub observed: bool,
}

impl TsdfVolume {
    pub fn from_parts(
        origin: Vec3,
        voxel_size: f64,
        dims: [usize; 3],
        truncation: f64,
        values: Vec<f32>,
        weights: Vec<f32>,
    ) -> Result<Self, SceneError> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(SceneError::InvalidParameter(format!(
                "voxel size must be positive, got {voxel_size}"
            )));
        }
        if !(truncation > 0.0 && truncation.is_finite()) {
            return Err(SceneError::InvalidParameter(format!(
                "truncation must be positive, got {truncation}"
            )));
        }
        if dims.iter().any(|d| *d < 2) {
            return Err(SceneError::InvalidParameter(format!(
                "every grid dimension must be at least 2, got {dims:?}"
            )));
        }
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n || weights.len() != n {
            return Err(SceneError::InvalidParameter(format!(
                "expected {n} samples, got {} values and {} weights",
                values.len(),
                weights.len()
            )));
        }
        let trunc32 = truncation as f32;
        if values.iter().any(|v| !v.is_finite() || v.abs() > trunc32) {
            return Err(SceneError::InvalidParameter(
                "values must be finite and within the truncation band".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SceneError::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            origin,
            voxel_size,
            dims,
            truncation,
            values,
            weights,
        })
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.voxel_size
    }

    pub fn value_at(&self, i: usize, j: usize, k: usize) -> f32 {
        self.values[self.index(i, j, k)]
    }

    pub fn weight_at(&self, i: usize, j: usize, k: usize) -> f32 {
        self.weights[self.index(i, j, k)]
    }

    fn unobserved(&self) -> SdfSample {
        SdfSample {
            distance: self.truncation,
            gradient: Vec3::zeros(),
            observed: false,
        }
    }

    /// Trilinear signed distance and the analytic gradient of the
    /// interpolant. Points outside the grid or touching an unobserved node
    /// return `+truncation`, a zero gradient and `observed == false`.
    pub fn query(&self, x: &Vec3) -> SdfSample {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..3 {
            let mut g = (x[axis] - self.origin[axis]) / self.voxel_size;
            // Snap round-off so node positions hit their node exactly.
            let r = g.round();
            if (g - r).abs() < 1e-12 * r.abs().max(1.0) {
                g = r;
            }
            let top = (self.dims[axis] - 1) as f64;
            if !(g >= 0.0 && g <= top) {
                return self.unobserved();
            }
            let i0 = (g.floor() as usize).min(self.dims[axis] - 2);
            base[axis] = i0;
            frac[axis] = g - i0 as f64;
        }
        let [i, j, k] = base;
        let mut c = [[[0.0f64; 2]; 2]; 2];
        for (dz, plane) in c.iter_mut().enumerate() {
            for (dy, row) in plane.iter_mut().enumerate() {
                for (dx, v) in row.iter_mut().enumerate() {
                    let idx = self.index(i + dx, j + dy, k + dz);
                    if self.weights[idx] <= 0.0 {
                        return self.unobserved();
                    }
                    *v = self.values[idx] as f64;
                }
            }
        }
        let [fx, fy, fz] = frac;
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        // c[z][y][x]
        let c00 = lerp(c[0][0][0], c[0][0][1], fx);
        let c10 = lerp(c[0][1][0], c[0][1][1], fx);
        let c01 = lerp(c[1][0][0], c[1][0][1], fx);
        let c11 = lerp(c[1][1][0], c[1][1][1], fx);
        let c0 = lerp(c00, c10, fy);
        let c1 = lerp(c01, c11, fy);
        let distance = lerp(c0, c1, fz);

        let dx_ = |y: usize, z: usize| c[z][y][1] - c[z][y][0];
        let gx = lerp(lerp(dx_(0, 0), dx_(1, 0), fy), lerp(dx_(0, 1), dx_(1, 1), fy), fz);
        let gy = lerp(c10 - c00, c11 - c01, fz);
        let gz = c1 - c0;
        SdfSample {
            distance,
            gradient: Vec3::new(gx, gy, gz) / self.voxel_size,
            observed: true,
        }
    }

    /// Query the volume as if it were scaled by `scale`: the metric distance at
    /// metric point `x` is `scale * d(x / scale)`.
    pub fn query_metric(&self, x: &Vec3, scale: f64) -> MetricSample {
        let native = x / scale;
        let s = self.query(&native);
        if !s.observed {
            return MetricSample {
                distance: scale * self.truncation,
                gradient: Vec3::zeros(),
                d_scale: 0.0,
                observed: false,
            };
        }
        MetricSample {
            distance: scale * s.distance,
            gradient: s.gradient,
            d_scale: s.distance - s.gradient.dot(&native),
            observed: true,
        }
    }
}

/// Number of grid nodes needed to span `extent` at `voxel_size`.
pub(crate) fn grid_nodes(extent: f64, voxel_size: f64) -> usize {
    ((extent / voxel_size) - 1e-9).ceil().max(1.0) as usize + 1
}

/// Fuses an oriented cloud into a TSDF covering its bounding box expanded by
/// `padding` on every side.
///
/// Each node takes the Gaussian-weighted (`exp(-r^2 / truncation^2)`) mean of
/// the point-to-plane distances `n . (x - p)` of all points within
/// `truncation`, clamped to the band. The stored weight is the number of
/// contributing points.
pub fn fuse_tsdf(
    cloud: &ScenePointCloud,
    voxel_size: f64,
    truncation: f64,
    padding: f64,
) -> Result<TsdfVolume, SceneError> {
    if !(voxel_size > 0.0 && voxel_size.is_finite()) {
        return Err(SceneError::InvalidParameter(format!(
            "voxel size must be positive, got {voxel_size}"
        )));
    }
    if !(truncation >= 2.0 * voxel_size && truncation.is_finite()) {
        return Err(SceneError::InvalidParameter(format!(
            "truncation {truncation} must be at least twice the voxel size {voxel_size}"
        )));
    }
    if !(padding >= 0.0 && padding.is_finite()) {
        return Err(SceneError::InvalidParameter(format!(
            "padding must be non-negative, got {padding}"
        )));
    }
    let bb = cloud.aabb();
    let origin = bb.min - Vec3::repeat(padding);
    let extent = bb.extent() + Vec3::repeat(2.0 * padding);
    let mut dims = [0usize; 3];
    for axis in 0..3 {
        if extent[axis] <= 0.0 {
            return Err(SceneError::DegenerateCloud { axis });
        }
        dims[axis] = grid_nodes(extent[axis], voxel_size);
    }
    let n = dims[0] * dims[1] * dims[2];
    let mut sum_wd = vec![0.0f64; n];
    let mut sum_w = vec![0.0f64; n];
    let mut count = vec![0u32; n];
    let t2 = truncation * truncation;

    for (p, normal) in cloud.points().iter().zip(cloud.normals()) {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for axis in 0..3 {
            let a = ((p[axis] - truncation - origin[axis]) / voxel_size).ceil().max(0.0);
            let b = ((p[axis] + truncation - origin[axis]) / voxel_size)
                .floor()
                .min((dims[axis] - 1) as f64);
            lo[axis] = a as usize;
            hi[axis] = b as usize;
        }
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let x = origin + Vec3::new(i as f64, j as f64, k as f64) * voxel_size;
                    let diff = x - p;
                    let r2 = diff.norm_squared();
                    if r2 > t2 {
                        continue;
                    }
                    let w = (-r2 / t2).exp();
                    let idx = i + dims[0] * (j + dims[1] * k);
                    sum_wd[idx] += w * normal.dot(&diff);
                    sum_w[idx] += w;
                    count[idx] += 1;
                }
            }
        }
    }

    let trunc32 = truncation as f32;
    let mut values = vec![trunc32; n];
    let mut weights = vec![0.0f32; n];
    for idx in 0..n {
        if count[idx] > 0 {
            let d = (sum_wd[idx] / sum_w[idx]).clamp(-truncation, truncation) as f32;
            values[idx] = d.clamp(-trunc32, trunc32);
            weights[idx] = count[idx] as f32;
        }
    }
    TsdfVolume::from_parts(origin, voxel_size, dims, truncation, values, weights)
}
