use serde::{Deserialize, Serialize};

use super::delaunay::{delaunay_tetrahedralize, tetrahedra_edges};
use super::sampling::{NodeRole, TaggedPoint};
use super::RetargetError;
use crate::Vec3;

/// Keypoints and terrain samples connected by the edges of their Delaunay
/// tetrahedralization. Body nodes come first, in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMesh {
    pub nodes: Vec<Vec3>,
    pub roles: Vec<NodeRole>,
    /// Sorted, symmetric adjacency.
    pub neighbors: Vec<Vec<usize>>,
    pub tetrahedra: Vec<[usize; 4]>,
    pub jittered: bool,
}

impl InteractionMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn body_count(&self) -> usize {
        self.roles.iter().filter(|r| **r == NodeRole::Body).count()
    }

    /// Uniform weight every neighbor of `i` receives.
    pub fn weight(&self, i: usize) -> f64 {
        1.0 / self.neighbors[i].len() as f64
    }

    /// `δ_i = p_i − Σ_j w_ij p_j` for every node.
    pub fn laplacian_coordinates(&self, positions: &[Vec3]) -> Result<Vec<Vec3>, RetargetError> {
        self.check_len(positions.len())?;
        Ok(self
            .neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| {
                let mean = nb.iter().map(|&j| positions[j]).sum::<Vec3>() / nb.len() as f64;
                positions[i] - mean
            })
            .collect())
    }

    fn check_len(&self, found: usize) -> Result<(), RetargetError> {
        if found != self.len() {
            return Err(RetargetError::NodeCountMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

pub fn build_interaction_mesh(
    body_keypoints: &[Vec3],
    terrain: &[TaggedPoint],
) -> Result<InteractionMesh, RetargetError> {
    let mut nodes = body_keypoints.to_vec();
    let mut roles = vec![NodeRole::Body; body_keypoints.len()];
    for t in terrain {
        nodes.push(t.position);
        roles.push(t.role);
    }
    if nodes.len() < 5 {
        return Err(RetargetError::DegenerateConfiguration(format!(
            "interaction mesh needs at least 5 nodes, got {}",
            nodes.len()
        )));
    }
    let tri = delaunay_tetrahedralize(&nodes)?;
    let mut neighbors = vec![Vec::new(); nodes.len()];
    for (i, j) in tetrahedra_edges(&tri.tetrahedra) {
        neighbors[i].push(j);
        neighbors[j].push(i);
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    Ok(InteractionMesh {
        nodes,
        roles,
        neighbors,
        tetrahedra: tri.tetrahedra,
        jittered: tri.jittered,
    })
}

/// `E = Σ_i ‖δ_i(source) − δ_i(target)‖²` and its gradient with respect
/// to the target positions of the body nodes. Terrain nodes are held fixed.
pub fn laplacian_energy(
    mesh: &InteractionMesh,
    source: &[Vec3],
    target: &[Vec3],
) -> Result<(f64, Vec<Vec3>), RetargetError> {
    let ds = mesh.laplacian_coordinates(source)?;
    let dt = mesh.laplacian_coordinates(target)?;
    let residual: Vec<Vec3> = ds.iter().zip(&dt).map(|(a, b)| a - b).collect();
    let energy = residual.iter().map(|e| e.norm_squared()).sum();

    // ∂E/∂t_k = −2 (e_k − Σ_{i ∋ k} w_ik e_i)
    let mut grad: Vec<Vec3> = residual.iter().map(|e| -2.0 * e).collect();
    for (i, nb) in mesh.neighbors.iter().enumerate() {
        let w = mesh.weight(i);
        for &k in nb {
            grad[k] += 2.0 * w * residual[i];
        }
    }
    let body: Vec<Vec3> = grad
        .into_iter()
        .zip(&mesh.roles)
        .filter(|(_, r)| **r == NodeRole::Body)
        .map(|(g, _)| g)
        .collect();
    Ok((energy, body))
}
