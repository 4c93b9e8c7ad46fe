use std::collections::{BTreeSet, HashMap};

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust::{insphere, orient3d, Coord3D};

use super::RetargetError;
use crate::scene::Aabb;
use crate::Vec3;

/// Relative size of the random perturbation used when the input has
/// co-spherical or duplicate points.
const JITTER_FRACTION: f64 = 1e-9;
const SUPER_SCALE: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct Tetrahedralization {
    /// Vertex quadruples with `(b - a) x (c - a) . (d - a) > 0`.
    pub tetrahedra: Vec<[usize; 4]>,
    /// Set when the input had to be perturbed to break a degeneracy.
    pub jittered: bool,
}

#[inline]
fn c(p: &Vec3) -> Coord3D<f64> {
    Coord3D { x: p.x, y: p.y, z: p.z }
}

/// Delaunay tetrahedralization by incremental insertion with exact
/// orientation and in-sphere predicates.
///
/// Inputs with co-spherical subsets or duplicate points are retried once
/// after a deterministic perturbation of `1e-9` times the bounding-box
/// diagonal; the result reports this through `jittered`. Coplanar inputs
/// are rejected.
pub fn delaunay_tetrahedralize(points: &[Vec3]) -> Result<Tetrahedralization, RetargetError> {
    if points.len() < 4 {
        return Err(RetargetError::DegenerateConfiguration(format!(
            "{} points cannot span a tetrahedron",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(RetargetError::DegenerateConfiguration("non-finite node".into()));
    }
    let bb = Aabb::from_points(points).expect("non-empty");
    let diameter = bb.diagonal();
    if !spans_volume(points, diameter) {
        return Err(RetargetError::DegenerateConfiguration(
            "all nodes are coplanar".into(),
        ));
    }
    if let Some(tetrahedra) = bowyer_watson(points, diameter) {
        return Ok(Tetrahedralization {
            tetrahedra,
            jittered: false,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_de1a);
    let amp = JITTER_FRACTION * diameter;
    let jittered: Vec<Vec3> = points
        .iter()
        .map(|p| {
            p + Vec3::new(
                rng.random_range(-amp..amp),
                rng.random_range(-amp..amp),
                rng.random_range(-amp..amp),
            )
        })
        .collect();
    bowyer_watson(&jittered, diameter)
        .map(|tetrahedra| Tetrahedralization {
            tetrahedra,
            jittered: true,
        })
        .ok_or_else(|| {
            RetargetError::DegenerateConfiguration(
                "tetrahedralization failed even after perturbation".into(),
            )
        })
}

fn spans_volume(points: &[Vec3], diameter: f64) -> bool {
    if diameter <= 0.0 {
        return false;
    }
    let a = points[0];
    let Some(b) = points
        .iter()
        .max_by(|p, q| (*p - a).norm_squared().total_cmp(&(*q - a).norm_squared()))
    else {
        return false;
    };
    let ab = b - a;
    let Some(cpt) = points
        .iter()
        .max_by(|p, q| ab.cross(&(*p - a)).norm().total_cmp(&ab.cross(&(*q - a)).norm()))
    else {
        return false;
    };
    let normal = ab.cross(&(cpt - a));
    let area = normal.norm();
    if area <= 1e-12 * diameter * diameter {
        return false;
    }
    let n = normal / area;
    points.iter().any(|p| n.dot(&(p - a)).abs() > 1e-10 * diameter)
}

/// Returns `None` when a degeneracy (zero in-sphere or orientation
/// determinant) is hit.
fn bowyer_watson(input: &[Vec3], diameter: f64) -> Option<Vec<[usize; 4]>> {
    let n = input.len();
    let bb = Aabb::from_points(input)?;
    let center = (bb.min + bb.max) / 2.0;
    let s = SUPER_SCALE * diameter.max(1e-9);
    // A regular enclosing simplex turned by an arbitrary rotation so its
    // corners do not line up with axis-aligned input.
    let turn = Rotation3::from_euler_angles(0.3719, 0.8123, 1.2345);
    let mut pts = input.to_vec();
    for d in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
        pts.push(center + turn * (s * Vec3::from(d)));
    }

    let orient = |t: &[usize; 4], pts: &[Vec3]| orient3d(c(&pts[t[0]]), c(&pts[t[1]]), c(&pts[t[2]]), c(&pts[t[3]]));
    let mut first = [n, n + 1, n + 2, n + 3];
    let o = orient(&first, &pts);
    if o == 0.0 {
        return None;
    }
    if o < 0.0 {
        first.swap(0, 1);
    }
    let mut tets: Vec<[usize; 4]> = vec![first];

    for p in 0..n {
        let pp = c(&pts[p]);
        let mut bad = Vec::new();
        let mut keep = Vec::with_capacity(tets.len() + 8);
        for t in tets.drain(..) {
            let s = insphere(c(&pts[t[0]]), c(&pts[t[1]]), c(&pts[t[2]]), c(&pts[t[3]]), pp);
            if s == 0.0 {
                return None;
            }
            if s > 0.0 {
                bad.push(t);
            } else {
                keep.push(t);
            }
        }
        if bad.is_empty() {
            return None;
        }
        let mut faces: HashMap<[usize; 3], ([usize; 3], u32)> = HashMap::new();
        for t in &bad {
            for skip in 0..4 {
                let mut f = [0usize; 3];
                let mut k = 0;
                for (i, v) in t.iter().enumerate() {
                    if i != skip {
                        f[k] = *v;
                        k += 1;
                    }
                }
                let mut key = f;
                key.sort_unstable();
                faces.entry(key).or_insert((f, 0)).1 += 1;
            }
        }
        let mut boundary: Vec<[usize; 3]> = faces
            .into_values()
            .filter(|(_, count)| *count == 1)
            .map(|(f, _)| f)
            .collect();
        boundary.sort_unstable();
        for f in boundary {
            let mut t = [f[0], f[1], f[2], p];
            let o = orient(&t, &pts);
            if o == 0.0 {
                return None;
            }
            if o < 0.0 {
                t.swap(0, 1);
            }
            keep.push(t);
        }
        tets = keep;
    }

    tets.retain(|t| t.iter().all(|&v| v < n));
    let mut used = vec![false; n];
    for t in &tets {
        for &v in t {
            used[v] = true;
        }
    }
    if used.iter().any(|u| !u) {
        return None;
    }
    // The predicates above want `orient3d > 0`, which is a negative signed
    // volume; flip to the usual right-handed convention on the way out.
    for t in &mut tets {
        t.swap(0, 1);
    }
    tets.sort_unstable();
    Some(tets)
}

/// Undirected edges `(i, j)` with `i < j` of a set of tetrahedra.
pub fn tetrahedra_edges(tetrahedra: &[[usize; 4]]) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for t in tetrahedra {
        for a in 0..4 {
            for b in a + 1..4 {
                let (i, j) = (t[a].min(t[b]), t[a].max(t[b]));
                edges.insert((i, j));
            }
        }
    }
    edges
}
