use super::SceneError;
use crate::Vec3;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            bb.min = bb.min.inf(p);
            bb.max = bb.max.sup(p);
        }
        Some(bb)
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }
}

/// Oriented scene points in scene-native coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePointCloud {
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
}

impl ScenePointCloud {
    pub fn new(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self, SceneError> {
        if points.is_empty() {
            return Err(SceneError::InvalidCloud("cloud has no points".into()));
        }
        if points.len() != normals.len() {
            return Err(SceneError::InvalidCloud(format!(
                "{} points but {} normals",
                points.len(),
                normals.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(SceneError::InvalidCloud(format!("point {i} is not finite")));
        }
        if let Some(i) = normals.iter().position(|n| (n.norm() - 1.0).abs() > 1e-6) {
            return Err(SceneError::InvalidCloud(format!(
                "normal {i} is not unit length"
            )));
        }
        Ok(Self { points, normals })
    }

    /// Like [`ScenePointCloud::new`] but rescales normals to unit length first.
    pub fn with_normalized_normals(points: Vec<Vec3>, normals: Vec<Vec3>) -> Result<Self, SceneError> {
        let normals = normals
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                n.try_normalize(1e-12).ok_or_else(|| {
                    SceneError::InvalidCloud(format!("normal {i} has zero length"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points, normals)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.points).expect("cloud is non-empty")
    }

    /// Uniformly scaled copy; normals are unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| p * factor).collect(),
            normals: self.normals.clone(),
        }
    }
}
