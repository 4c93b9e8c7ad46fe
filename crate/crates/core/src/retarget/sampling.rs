use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scene::ScenePointCloud;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Body,
    TerrainLocal,
    TerrainGlobal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggedPoint {
    pub position: Vec3,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainSample {
    /// Global samples first, then local ones.
    pub points: Vec<TaggedPoint>,
    /// No cloud point lay within the local radius; only global samples
    /// were produced.
    pub local_region_empty: bool,
}

/// Greedy farthest-point sampling starting at `start`. Ties pick the lowest
/// index. Returns at most `points.len()` indices.
pub fn farthest_point_sampling(points: &[Vec3], count: usize, start: usize) -> Vec<usize> {
    let count = count.min(points.len());
    if count == 0 {
        return Vec::new();
    }
    let mut chosen = Vec::with_capacity(count);
    let mut dist = vec![f64::INFINITY; points.len()];
    let mut next = start.min(points.len() - 1);
    while chosen.len() < count {
        chosen.push(next);
        let p = points[next];
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, q) in points.iter().enumerate() {
            let d = (q - p).norm_squared();
            if d < dist[i] {
                dist[i] = d;
            }
            if dist[i] > best.0 {
                best = (dist[i], i);
            }
        }
        next = best.1;
    }
    chosen
}

/// Global farthest-point samples over the whole cloud plus uniform samples
/// from the ball of `local_radius` around `anchor`.
pub fn sample_terrain(
    cloud: &ScenePointCloud,
    anchor: Vec3,
    local_radius: f64,
    n_local: usize,
    n_global: usize,
    seed: u64,
) -> TerrainSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = cloud.points();
    let start = rng.random_range(0..pts.len());
    let mut points: Vec<TaggedPoint> = farthest_point_sampling(pts, n_global, start)
        .into_iter()
        .map(|i| TaggedPoint {
            position: pts[i],
            role: NodeRole::TerrainGlobal,
        })
        .collect();

    let r2 = local_radius * local_radius;
    let near: Vec<usize> = (0..pts.len())
        .filter(|&i| (pts[i] - anchor).norm_squared() <= r2)
        .collect();
    let local_region_empty = near.is_empty();
    let take = n_local.min(near.len());
    let mut picked: Vec<usize> = index::sample(&mut rng, near.len(), take).into_vec();
    picked.sort_unstable();
    points.extend(picked.into_iter().map(|k| TaggedPoint {
        position: pts[near[k]],
        role: NodeRole::TerrainLocal,
    }));
    TerrainSample {
        points,
        local_region_empty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: Vec<Vec3>) -> ScenePointCloud {
        let normals = vec![Vec3::z(); points.len()];
        ScenePointCloud::new(points, normals).unwrap()
    }

    #[test]
    fn zero_counts_give_nothing() {
        let c = cloud(vec![Vec3::zeros(), Vec3::x()]);
        let s = sample_terrain(&c, Vec3::zeros(), 1.0, 0, 0, 3);
        assert!(s.points.is_empty());
        assert!(!s.local_region_empty);
    }

    #[test]
    fn one_sample_per_cluster() {
        let centers = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(0.0, 10.0, 0.0),
            Vec3::new(0.0, 0.0, 10.0),
        ];
        let mut pts = Vec::new();
        for (k, c) in centers.iter().enumerate() {
            for j in 0..5 {
                pts.push(c + Vec3::new(0.01 * j as f64, 0.02 * k as f64, 0.0));
            }
        }
        let c = cloud(pts);
        for seed in 0..8 {
            let s = sample_terrain(&c, Vec3::zeros(), 0.0, 0, 4, seed);
            let mut clusters: Vec<usize> = s
                .points
                .iter()
                .map(|p| {
                    (0..4)
                        .min_by(|&a, &b| {
                            (p.position - centers[a]).norm().total_cmp(&(p.position - centers[b]).norm())
                        })
                        .unwrap()
                })
                .collect();
            clusters.sort_unstable();
            assert_eq!(clusters, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn local_samples_come_from_the_ball() {
        let pts: Vec<Vec3> = (0..30).map(|i| Vec3::new(0.01 * i as f64, 0.0, 0.0)).collect();
        let c = cloud(pts.clone());
        let s = sample_terrain(&c, Vec3::zeros(), 5.0, 50, 0, 9);
        assert_eq!(s.points.len(), 30);
        assert!(s.points.iter().all(|p| p.role == NodeRole::TerrainLocal && pts.contains(&p.position)));

        let far = sample_terrain(&c, Vec3::new(100.0, 0.0, 0.0), 1.0, 5, 2, 9);
        assert!(far.local_region_empty);
        assert_eq!(far.points.len(), 2);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let pts: Vec<Vec3> = (0..200)
            .map(|i| Vec3::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), 0.01 * i as f64))
            .collect();
        let c = cloud(pts);
        let a = sample_terrain(&c, Vec3::zeros(), 0.8, 10, 10, 42);
        let b = sample_terrain(&c, Vec3::zeros(), 0.8, 10, 10, 42);
        assert_eq!(a, b);
    }
}
