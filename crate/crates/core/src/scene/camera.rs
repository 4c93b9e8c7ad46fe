use nalgebra::{Matrix2x3, Matrix3, Vector2, Vector3};

use super::SceneError;
use crate::raster::{BinaryImage, DepthMap};
use crate::Vec3;

/// Points with camera-frame depth at or below this are treated as behind the
/// camera.
pub const MIN_CAMERA_DEPTH: f64 = 1e-9;

/// Pinhole camera for one timestep.
///
/// `rotation` and `translation` map world points into the camera frame
/// (`x_cam = R x + t`); the camera looks down `+z` with `+y` pointing down in
/// the image.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraFrame {
    pub intrinsics: Matrix3<f64>,
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
    pub width: usize,
    pub height: usize,
    pub depth: Option<DepthMap>,
    pub mask: Option<BinaryImage>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: Vector2<f64>,
    pub depth: f64,
}

impl CameraFrame {
    pub fn new(
        intrinsics: Matrix3<f64>,
        rotation: Matrix3<f64>,
        translation: Vec3,
        width: usize,
        height: usize,
    ) -> Result<Self, SceneError> {
        let k = &intrinsics;
        if k[(1, 0)] != 0.0 || k[(2, 0)] != 0.0 || k[(2, 1)] != 0.0 {
            return Err(SceneError::InvalidCamera(
                "intrinsics must be upper triangular".into(),
            ));
        }
        if !(k[(0, 0)] > 0.0 && k[(1, 1)] > 0.0 && k[(2, 2)] > 0.0) {
            return Err(SceneError::InvalidCamera(
                "intrinsics diagonal must be positive".into(),
            ));
        }
        let ortho = rotation * rotation.transpose() - Matrix3::identity();
        if ortho.iter().any(|v| v.abs() > 1e-9) || rotation.determinant() <= 0.0 {
            return Err(SceneError::InvalidCamera(
                "rotation is not a proper orthonormal matrix".into(),
            ));
        }
        if intrinsics.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(SceneError::InvalidCamera("non-finite parameters".into()));
        }
        if width == 0 || height == 0 {
            return Err(SceneError::InvalidCamera("empty image size".into()));
        }
        Ok(Self {
            intrinsics,
            rotation,
            translation,
            width,
            height,
            depth: None,
            mask: None,
        })
    }

    /// Camera at `eye` looking at `target`, image `+y` pointing away from `up`.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        focal: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, SceneError> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| SceneError::InvalidCamera("eye coincides with target".into()))?;
        let right = forward
            .cross(&up)
            .try_normalize(1e-12)
            .ok_or_else(|| SceneError::InvalidCamera("up is parallel to view direction".into()))?;
        let down = forward.cross(&right);
        let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let intrinsics = Matrix3::new(
            focal,
            0.0,
            width as f64 / 2.0,
            0.0,
            focal,
            height as f64 / 2.0,
            0.0,
            0.0,
            1.0,
        );
        Self::new(intrinsics, rotation, -(rotation * eye), width, height)
    }

    pub fn with_depth(mut self, depth: DepthMap) -> Result<Self, SceneError> {
        self.check_raster(depth.size())?;
        self.depth = Some(depth);
        Ok(self)
    }

    pub fn with_mask(mut self, mask: BinaryImage) -> Result<Self, SceneError> {
        self.check_raster(mask.size())?;
        self.mask = Some(mask);
        Ok(self)
    }

    fn check_raster(&self, size: (usize, usize)) -> Result<(), SceneError> {
        if size != (self.width, self.height) {
            return Err(crate::raster::RasterError::SizeMismatch {
                expected: (self.width, self.height),
                found: size,
            }
            .into());
        }
        Ok(())
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    pub fn to_camera(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    pub fn project(&self, x: &Vec3) -> Result<Projection, SceneError> {
        let xc = self.to_camera(x);
        if xc.z <= MIN_CAMERA_DEPTH {
            return Err(SceneError::BehindCamera { depth: xc.z });
        }
        let p = self.intrinsics * xc;
        Ok(Projection {
            pixel: Vector2::new(p.x / p.z, p.y / p.z),
            depth: xc.z,
        })
    }

    /// Projection together with the 2x3 Jacobian of the pixel with respect to
    /// the world point.
    pub fn project_with_jacobian(
        &self,
        x: &Vec3,
    ) -> Result<(Projection, Matrix2x3<f64>), SceneError> {
        let xc = self.to_camera(x);
        if xc.z <= MIN_CAMERA_DEPTH {
            return Err(SceneError::BehindCamera { depth: xc.z });
        }
        let p = self.intrinsics * xc;
        let (u, v) = (p.x / p.z, p.y / p.z);
        let k = &self.intrinsics;
        let row = |r: usize, coord: f64| -> nalgebra::RowVector3<f64> {
            (k.row(r) - coord * k.row(2)) / p.z
        };
        let d_pixel_d_cam = Matrix2x3::from_rows(&[row(0, u), row(1, v)]);
        Ok((
            Projection {
                pixel: Vector2::new(u, v),
                depth: xc.z,
            },
            d_pixel_d_cam * self.rotation,
        ))
    }

    /// Integer pixel containing a continuous pixel coordinate; pixel centers
    /// sit at integer coordinates.
    pub fn pixel_index(&self, pixel: &Vector2<f64>) -> Option<(usize, usize)> {
        let x = (pixel.x + 0.5).floor();
        let y = (pixel.y + 0.5).floor();
        if x >= 0.0 && y >= 0.0 && x < self.width as f64 && y < self.height as f64 {
            Some((x as usize, y as usize))
        } else {
            None
        }
    }

    /// Pixel and depth of a world point visible in the image, if any.
    pub fn visible_pixel(&self, x: &Vec3) -> Option<((usize, usize), f64)> {
        let proj = self.project(x).ok()?;
        self.pixel_index(&proj.pixel).map(|px| (px, proj.depth))
    }

    /// Back-projects pixel `(u, v)` at camera-frame depth `depth` to world.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Option<Vec3> {
        let kinv = self.intrinsics.try_inverse()?;
        let ray = kinv * Vector3::new(u, v, 1.0);
        let xc = ray * (depth / ray.z);
        Some(self.rotation.transpose() * (xc - self.translation))
    }
}
