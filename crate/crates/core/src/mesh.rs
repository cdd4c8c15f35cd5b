//! Indexed triangle meshes and their derived per-face/per-vertex quantities.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;

/// Faces whose area falls below this fraction of the mean face area are flagged degenerate.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh has no vertices")]
    Empty,
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex: {indices:?}")]
    RepeatedVertex { face: usize, indices: [usize; 3] },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("meshes differ in connectivity")]
    ConnectivityMismatch,
    #[error("face counts differ ({0} vs {1})")]
    FaceCountMismatch(usize, usize),
}

/// An undirected edge stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Self {
        if i < j {
            Edge { a: i, b: j }
        } else {
            Edge { a: j, b: i }
        }
    }
}

/// Indexed triangle mesh with cached normals, areas, centroids and adjacency.
///
/// Positions and connectivity are the source of truth. Everything else is
/// rebuilt by [`TriMesh::recompute_derived`] (or the cheaper
/// [`TriMesh::recompute_geometry`] when only positions changed).
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_normals: Vec<Vec3>,
    face_areas: Vec<f64>,
    face_centroids: Vec<Vec3>,
    degenerate: Vec<bool>,
    vertex_star: Vec<Vec<usize>>,
    face_adjacency: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Builds a mesh and populates all derived data.
    ///
    /// A mesh with vertices but no faces is allowed (it is what a point cloud
    /// or an emptied mesh saves as); a mesh with no vertices is not.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() {
            return Err(MeshError::Empty);
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFinite(i));
        }
        for (f, tri) in faces.iter().enumerate() {
            for &index in tri {
                if index >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index,
                        vertex_count: vertices.len(),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex {
                    face: f,
                    indices: *tri,
                });
            }
        }
        let mut mesh = TriMesh {
            vertices,
            faces,
            face_normals: Vec::new(),
            face_areas: Vec::new(),
            face_centroids: Vec::new(),
            degenerate: Vec::new(),
            vertex_star: Vec::new(),
            face_adjacency: Vec::new(),
        };
        mesh.recompute_derived();
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn face_centroids(&self) -> &[Vec3] {
        &self.face_centroids
    }

    /// `true` for faces whose area is negligible; their normal is the zero vector.
    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn is_degenerate(&self, f: usize) -> bool {
        self.degenerate[f]
    }

    /// Faces incident to vertex `v`, in ascending order.
    pub fn vertex_star(&self, v: usize) -> &[usize] {
        &self.vertex_star[v]
    }

    /// Faces sharing an edge with face `f`, in ascending order.
    pub fn face_adjacency(&self, f: usize) -> &[usize] {
        &self.face_adjacency[f]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_positions(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Replaces all vertex positions (same count) and refreshes geometric data.
    ///
    /// # Panics
    /// If the number of positions differs from the vertex count.
    pub fn set_vertices(&mut self, positions: Vec<Vec3>) {
        assert_eq!(positions.len(), self.vertices.len(), "vertex count must not change");
        self.vertices = positions;
        self.recompute_geometry();
    }

    /// Copy of this mesh with every face's winding reversed.
    pub fn reversed(&self) -> TriMesh {
        let mut out = self.clone();
        for tri in &mut out.faces {
            tri.swap(1, 2);
        }
        out.recompute_geometry();
        out
    }

    /// Reverses the winding of the listed faces.
    pub fn flip_faces(&mut self, faces: &[usize]) {
        for &f in faces {
            self.faces[f].swap(1, 2);
        }
        self.recompute_geometry();
    }

    /// Rebuilds normals, areas, centroids, degeneracy flags, vertex stars and face adjacency.
    pub fn recompute_derived(&mut self) {
        self.recompute_geometry();
        self.recompute_topology();
    }

    /// Rebuilds the position-dependent fields only; connectivity data is left untouched.
    pub fn recompute_geometry(&mut self) {
        let nf = self.faces.len();
        self.face_normals.clear();
        self.face_areas.clear();
        self.face_centroids.clear();
        self.face_normals.reserve(nf);
        self.face_areas.reserve(nf);
        self.face_centroids.reserve(nf);

        let mut raw_normals = Vec::with_capacity(nf);
        for f in 0..nf {
            let [p0, p1, p2] = self.face_positions(f);
            let cross = (p1 - p0).cross(p2 - p0);
            let twice_area = cross.norm();
            self.face_areas.push(0.5 * twice_area);
            self.face_centroids.push((p0 + p1 + p2) / 3.0);
            raw_normals.push((cross, twice_area));
        }

        let mean_area = if nf == 0 {
            0.0
        } else {
            self.face_areas.iter().sum::<f64>() / nf as f64
        };
        let threshold = DEGENERATE_AREA_RATIO * mean_area;
        self.degenerate = self
            .face_areas
            .iter()
            .map(|&a| !(a > threshold))
            .collect();
        for (f, (cross, twice_area)) in raw_normals.into_iter().enumerate() {
            if self.degenerate[f] {
                self.face_normals.push(Vec3::ZERO);
            } else {
                self.face_normals.push(cross / twice_area);
            }
        }
    }

    fn recompute_topology(&mut self) {
        let mut star = vec![Vec::new(); self.vertices.len()];
        for (f, tri) in self.faces.iter().enumerate() {
            for &v in tri {
                star[v].push(f);
            }
        }
        self.vertex_star = star;

        let mut adjacency = vec![Vec::new(); self.faces.len()];
        for faces in self.edge_faces().values() {
            for (k, &f) in faces.iter().enumerate() {
                for &g in &faces[k + 1..] {
                    if f != g {
                        adjacency[f].push(g);
                        adjacency[g].push(f);
                    }
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        self.face_adjacency = adjacency;
    }

    /// Map from each undirected edge to the faces containing it.
    pub fn edge_faces(&self) -> BTreeMap<Edge, Vec<usize>> {
        let mut map: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for (f, &[a, b, c]) in self.faces.iter().enumerate() {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                map.entry(Edge::new(i, j)).or_default().push(f);
            }
        }
        map
    }

    /// Every undirected edge once, in ascending order.
    pub fn unique_edges(&self) -> Vec<Edge> {
        self.edge_faces().into_keys().collect()
    }

    /// Mean length of the unique undirected edges. `None` if the mesh has no edges.
    pub fn average_edge_length(&self) -> Option<f64> {
        let edges = self.unique_edges();
        if edges.is_empty() {
            return None;
        }
        let total: f64 = edges
            .iter()
            .map(|e| self.vertices[e.a].distance(self.vertices[e.b]))
            .sum();
        Some(total / edges.len() as f64)
    }

    /// Per-vertex flag: the vertex lies on an edge used by exactly one face.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for (edge, faces) in self.edge_faces() {
            if faces.len() == 1 {
                flags[edge.a] = true;
                flags[edge.b] = true;
            }
        }
        flags
    }

    /// Area-weighted average of incident face normals, normalized; zero for isolated vertices.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        (0..self.vertices.len())
            .map(|v| {
                let sum = self.vertex_star[v].iter().fold(Vec3::ZERO, |acc, &f| {
                    acc + self.face_normals[f] * self.face_areas[f]
                });
                sum.try_normalize().unwrap_or(Vec3::ZERO)
            })
            .collect()
    }

    /// `true` when `other` has the same vertex count and identical face triples.
    pub fn same_connectivity(&self, other: &TriMesh) -> bool {
        self.vertices.len() == other.vertices.len() && self.faces == other.faces
    }

    /// Checks that every interior edge is traversed in opposite directions by its two faces.
    pub fn check_orientation(&self) -> OrientationReport {
        let mut directed: BTreeMap<Edge, Vec<bool>> = BTreeMap::new();
        for &[a, b, c] in &self.faces {
            for (i, j) in [(a, b), (b, c), (c, a)] {
                directed.entry(Edge::new(i, j)).or_default().push(i < j);
            }
        }
        let mut report = OrientationReport::default();
        for dirs in directed.values() {
            match dirs.len() {
                1 => report.boundary_edges += 1,
                2 => {
                    if dirs[0] == dirs[1] {
                        report.inconsistent_edges += 1;
                    }
                }
                _ => report.non_manifold_edges += 1,
            }
        }
        report.total_edges = directed.len();
        report
    }
}

/// Result of [`TriMesh::check_orientation`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrientationReport {
    pub total_edges: usize,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    /// Interior edges whose two faces traverse them in the same direction.
    pub inconsistent_edges: usize,
}

impl OrientationReport {
    pub fn is_consistent(&self) -> bool {
        self.inconsistent_edges == 0
    }
}
