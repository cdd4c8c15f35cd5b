//! Face neighborhoods (combinatorial, geometric disk, dual-graph geodesic) and
//! the local binary weights assigned to their members.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::geom::Vec3;
use crate::mesh::TriMesh;

/// Weight of a neighbor whose normal is within the angle threshold of the center's.
pub const SIMILAR_WEIGHT: f64 = 1.0;
/// Weight of a neighbor across a feature; small but non-zero so the far side still votes.
pub const DISSIMILAR_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborhoodScheme {
    /// Faces sharing at least one vertex with the center face.
    Combinatorial,
    /// Faces whose centroid lies within `radius` of the center centroid, grown
    /// outward through edge adjacency.
    Geometric { radius: f64 },
    /// Faces within `radius` along the centroid-to-centroid dual graph.
    Geodesic { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("neighborhood radius must be positive and finite, got {0}")]
    BadRadius(f64),
}

impl NeighborhoodScheme {
    pub fn validate(&self) -> Result<(), SchemeError> {
        match *self {
            NeighborhoodScheme::Combinatorial => Ok(()),
            NeighborhoodScheme::Geometric { radius } | NeighborhoodScheme::Geodesic { radius } => {
                if radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(SchemeError::BadRadius(radius))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NeighborhoodScheme::Combinatorial => "combinatorial",
            NeighborhoodScheme::Geometric { .. } => "geometric",
            NeighborhoodScheme::Geodesic { .. } => "geodesic",
        }
    }
}

/// A center face and its weighted members. The center itself is always a member with weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center: usize,
    pub members: Vec<(usize, f64)>,
}

impl Neighborhood {
    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|&(_, w)| w).sum()
    }
}

/// Reusable per-thread buffers so repeated queries avoid `O(faces)` clears.
#[derive(Debug, Default, Clone)]
pub struct NeighborScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<usize>,
    dist: Vec<f64>,
    heap: BinaryHeap<HeapEntry>,
}

impl NeighborScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, face_count: usize) {
        if self.stamp.len() != face_count {
            self.stamp = vec![0; face_count];
            self.dist = vec![f64::INFINITY; face_count];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.queue.clear();
        self.heap.clear();
    }

    #[inline]
    fn visit(&mut self, f: usize) -> bool {
        if self.stamp[f] == self.epoch {
            false
        } else {
            self.stamp[f] = self.epoch;
            true
        }
    }

    #[inline]
    fn seen(&self, f: usize) -> bool {
        self.stamp[f] == self.epoch
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    face: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then face index for determinism.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.face.cmp(&self.face))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Union of the vertex stars of the face's three vertices (includes `f`), sorted.
pub fn combinatorial_neighbors(mesh: &TriMesh, f: usize) -> Vec<usize> {
    let mut out: Vec<usize> = mesh.faces()[f]
        .iter()
        .flat_map(|&v| mesh.vertex_star(v).iter().copied())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Growing-disk neighborhood: breadth-first expansion over edge-adjacent faces,
/// admitting only faces whose centroid is within `radius` of `f`'s centroid.
pub fn geometric_neighbors(
    mesh: &TriMesh,
    f: usize,
    radius: f64,
    scratch: &mut NeighborScratch,
) -> Vec<usize> {
    let centroids = mesh.face_centroids();
    let center = centroids[f];
    scratch.begin(mesh.face_count());
    scratch.visit(f);
    scratch.queue.push(f);
    let mut head = 0;
    while head < scratch.queue.len() {
        let g = scratch.queue[head];
        head += 1;
        for &h in mesh.face_adjacency(g) {
            if !scratch.seen(h) && centroids[h].distance(center) <= radius {
                scratch.visit(h);
                scratch.queue.push(h);
            }
        }
    }
    let mut out = core::mem::take(&mut scratch.queue);
    out.sort_unstable();
    scratch.queue = Vec::with_capacity(out.len());
    out
}

/// Faces whose shortest dual-graph path from `f` (edge weights are centroid distances)
/// is at most `radius`, sorted.
pub fn geodesic_neighbors(
    mesh: &TriMesh,
    f: usize,
    radius: f64,
    scratch: &mut NeighborScratch,
) -> Vec<usize> {
    let centroids = mesh.face_centroids();
    scratch.begin(mesh.face_count());
    let mut out = Vec::new();
    // `stamp` marks faces with a tentative distance from this query.
    scratch.visit(f);
    scratch.dist[f] = 0.0;
    scratch.heap.push(HeapEntry { dist: 0.0, face: f });
    while let Some(HeapEntry { dist, face }) = scratch.heap.pop() {
        if dist > scratch.dist[face] {
            continue;
        }
        out.push(face);
        for &h in mesh.face_adjacency(face) {
            let nd = dist + centroids[face].distance(centroids[h]);
            if nd > radius {
                continue;
            }
            if scratch.visit(h) || nd < scratch.dist[h] {
                scratch.dist[h] = nd;
                scratch.heap.push(HeapEntry { dist: nd, face: h });
            }
        }
    }
    out.sort_unstable();
    out
}

/// Dual-graph distances from `f` to every reachable face (infinite if unreachable).
pub fn geodesic_distances(mesh: &TriMesh, f: usize) -> Vec<f64> {
    let centroids = mesh.face_centroids();
    let mut dist = vec![f64::INFINITY; mesh.face_count()];
    let mut heap = BinaryHeap::new();
    dist[f] = 0.0;
    heap.push(HeapEntry { dist: 0.0, face: f });
    while let Some(HeapEntry { dist: d, face }) = heap.pop() {
        if d > dist[face] {
            continue;
        }
        for &h in mesh.face_adjacency(face) {
            let nd = d + centroids[face].distance(centroids[h]);
            if nd < dist[h] {
                dist[h] = nd;
                heap.push(HeapEntry { dist: nd, face: h });
            }
        }
    }
    dist
}

/// Members of `f`'s neighborhood under `scheme`, sorted, always including `f`.
pub fn neighbors(
    mesh: &TriMesh,
    f: usize,
    scheme: NeighborhoodScheme,
    scratch: &mut NeighborScratch,
) -> Vec<usize> {
    match scheme {
        NeighborhoodScheme::Combinatorial => combinatorial_neighbors(mesh, f),
        NeighborhoodScheme::Geometric { radius } => geometric_neighbors(mesh, f, radius, scratch),
        NeighborhoodScheme::Geodesic { radius } => geodesic_neighbors(mesh, f, radius, scratch),
    }
}

/// Assigns weight 1 to members whose normal is within `rho` radians of the
/// center's normal and 0.1 otherwise. Degenerate members are dropped; the
/// center is kept (inserted if missing) with weight 1.
pub fn binary_weights(
    mesh: &TriMesh,
    normals: &[Vec3],
    f: usize,
    members: &[usize],
    rho: f64,
) -> Neighborhood {
    let nf = normals[f];
    let mut out = Vec::with_capacity(members.len() + 1);
    let mut has_center = false;
    for &g in members {
        if g == f {
            has_center = true;
            out.push((g, SIMILAR_WEIGHT));
            continue;
        }
        if mesh.is_degenerate(g) {
            continue;
        }
        let angle = libm::acos(nf.dot(normals[g]).clamp(-1.0, 1.0));
        let w = if angle <= rho {
            SIMILAR_WEIGHT
        } else {
            DISSIMILAR_WEIGHT
        };
        out.push((g, w));
    }
    if !has_center {
        let pos = out.partition_point(|&(g, _)| g < f);
        out.insert(pos, (f, SIMILAR_WEIGHT));
    }
    Neighborhood {
        center: f,
        members: out,
    }
}
