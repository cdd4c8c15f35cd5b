//! Vertex positions are pulled toward agreement with filtered face normals by
//! gradient descent on the edge/normal orthogonality energy
//! `Σ_i Σ_{k ∈ star(i)} Σ_{(i,j) ∈ f_k} (ñ_k · (v_i − v_j))²`.

use alloc::vec::Vec;

use crate::exec::Executor;
use crate::geom::Vec3;
use crate::mesh::TriMesh;

pub const DEFAULT_INNER_ITERATIONS: usize = 10;

/// Default multiplier on the `1/F(v_i)` step. With the literal step (1.0) the
/// simultaneous update overshoots by a factor of two on regular meshes and
/// diverges; 1/3 is the same as moving toward `ñ_k`-projected face centroids.
pub const DEFAULT_STEP_SCALE: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum VertexError {
    #[error("inner iteration count must be at least 1")]
    NoIterations,
    #[error("normal array has {got} entries, mesh has {faces} faces")]
    NormalCount { got: usize, faces: usize },
    #[error("step scale must be positive and finite")]
    StepScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexUpdateParams {
    pub inner_iterations: usize,
    /// Multiplier on the `1/F(v_i)` step.
    pub step_scale: f64,
}

impl VertexUpdateParams {
    pub fn validate(&self) -> Result<(), VertexError> {
        if self.inner_iterations == 0 {
            return Err(VertexError::NoIterations);
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(VertexError::StepScale);
        }
        Ok(())
    }
}

impl Default for VertexUpdateParams {
    fn default() -> Self {
        VertexUpdateParams {
            inner_iterations: DEFAULT_INNER_ITERATIONS,
            step_scale: DEFAULT_STEP_SCALE,
        }
    }
}

/// The two other vertices of face `tri` as seen from vertex `i`.
#[inline]
fn others(tri: &[usize; 3], i: usize) -> [usize; 2] {
    if tri[0] == i {
        [tri[1], tri[2]]
    } else if tri[1] == i {
        [tri[2], tri[0]]
    } else {
        [tri[0], tri[1]]
    }
}

/// Vertex `i`'s share of the energy, evaluated at `positions`.
pub fn local_energy(mesh: &TriMesh, positions: &[Vec3], normals: &[Vec3], i: usize) -> f64 {
    let mut e = 0.0;
    for &k in mesh.vertex_star(i) {
        if mesh.is_degenerate(k) {
            continue;
        }
        let n = normals[k];
        for j in others(&mesh.faces()[k], i) {
            let d = n.dot(positions[i] - positions[j]);
            e += d * d;
        }
    }
    e
}

/// Total orthogonality energy at `positions`. Every (edge, face) pair is
/// counted once from each endpoint.
pub fn energy_at(mesh: &TriMesh, positions: &[Vec3], normals: &[Vec3]) -> f64 {
    (0..mesh.vertex_count())
        .map(|i| local_energy(mesh, positions, normals, i))
        .sum()
}

pub fn orthogonality_energy(mesh: &TriMesh, normals: &[Vec3]) -> f64 {
    energy_at(mesh, mesh.vertices(), normals)
}

/// `Σ_k Σ_j ñ_k (ñ_k · (v_j − v_i))` over the non-degenerate faces around
/// vertex `i`, with the number of those faces. This is `−½` times the
/// gradient of [`local_energy`] with respect to `v_i`.
pub fn descent_direction(mesh: &TriMesh, positions: &[Vec3], normals: &[Vec3], i: usize) -> (Vec3, usize) {
    let mut sum = Vec3::ZERO;
    let mut faces = 0usize;
    for &k in mesh.vertex_star(i) {
        if mesh.is_degenerate(k) {
            continue;
        }
        faces += 1;
        let n = normals[k];
        for j in others(&mesh.faces()[k], i) {
            sum += n * n.dot(positions[j] - positions[i]);
        }
    }
    (sum, faces)
}

/// `(step_scale / F(v_i)) ·` [`descent_direction`]. Zero for isolated vertices.
pub fn vertex_displacement(mesh: &TriMesh, positions: &[Vec3], normals: &[Vec3], i: usize, step_scale: f64) -> Vec3 {
    let (sum, faces) = descent_direction(mesh, positions, normals, i);
    if faces == 0 {
        Vec3::ZERO
    } else {
        sum * (step_scale / faces as f64)
    }
}

/// One simultaneous gradient step for all vertices from the `positions` snapshot.
pub fn step_positions<E: Executor>(
    mesh: &TriMesh,
    positions: &[Vec3],
    normals: &[Vec3],
    step_scale: f64,
    exec: &E,
) -> Vec<Vec3> {
    exec.map_indexed(positions.len(), || (), |_, i| {
        positions[i] + vertex_displacement(mesh, positions, normals, i, step_scale)
    })
}

/// New positions after one default-sized step from the mesh's current positions.
pub fn vertex_update_step<E: Executor>(mesh: &TriMesh, normals: &[Vec3], exec: &E) -> Vec<Vec3> {
    step_positions(mesh, mesh.vertices(), normals, DEFAULT_STEP_SCALE, exec)
}

/// Applies `params.inner_iterations` steps and refreshes the mesh's derived data.
pub fn synchronize_vertices<E: Executor>(
    mesh: &mut TriMesh,
    normals: &[Vec3],
    params: VertexUpdateParams,
    exec: &E,
) -> Result<(), VertexError> {
    params.validate()?;
    if normals.len() != mesh.face_count() {
        return Err(VertexError::NormalCount {
            got: normals.len(),
            faces: mesh.face_count(),
        });
    }
    let mut positions = mesh.vertices().to_vec();
    for _ in 0..params.inner_iterations {
        positions = step_positions(mesh, &positions, normals, params.step_scale, exec);
    }
    mesh.set_vertices(positions);
    Ok(())
}
