//! Per-vertex scalar fields, in particular the absolute cotangent mean curvature.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::Vec3;
use crate::mesh::TriMesh;

/// One finite scalar per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub name: String,
    pub values: Vec<f64>,
}

impl ScalarField {
    /// Value at the given percentile (0–100) by nearest rank; `0` for an empty field.
    pub fn percentile(&self, pct: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = libm::ceil(pct / 100.0 * sorted.len() as f64) as usize;
        sorted[rank.clamp(1, sorted.len()) - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub field: ScalarField,
    /// Vertices on the mesh boundary; their value is fixed at 0.
    pub boundary: Vec<bool>,
}

fn cot(a: Vec3, b: Vec3) -> f64 {
    let s = a.cross(b).norm();
    if s == 0.0 {
        0.0
    } else {
        a.dot(b) / s
    }
}

/// How the area associated with a vertex is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VertexArea {
    /// Voronoi area, falling back to fixed fractions of obtuse triangles.
    #[default]
    MixedVoronoi,
    /// One third of each incident triangle. Biased at irregular vertices
    /// (about 15% at the valence-5 vertices of an icosphere, at any resolution).
    Barycentric,
}

/// `|H|` per vertex with the default (mixed Voronoi) vertex area.
pub fn cotangent_mean_curvature(mesh: &TriMesh) -> CurvatureField {
    cotangent_mean_curvature_with(mesh, VertexArea::MixedVoronoi)
}

/// `|H| = |Σ (cot α + cot β)(x_j − x_i)| / (4 A_i)` per vertex, where `A_i` is
/// the vertex area chosen by `area_kind`. Boundary vertices get 0.
pub fn cotangent_mean_curvature_with(mesh: &TriMesh, area_kind: VertexArea) -> CurvatureField {
    let v = mesh.vertices();
    let boundary = mesh.boundary_vertices();
    let mut laplace = alloc::vec![Vec3::ZERO; mesh.vertex_count()];
    let mut area = alloc::vec![0.0; mesh.vertex_count()];
    for f in 0..mesh.face_count() {
        if mesh.is_degenerate(f) {
            continue;
        }
        let tri = mesh.faces()[f];
        let face_area = mesh.face_areas()[f];
        let obtuse_corner = (0..3).find(|&c| {
            let (i, j, k) = (tri[c], tri[(c + 1) % 3], tri[(c + 2) % 3]);
            (v[j] - v[i]).dot(v[k] - v[i]) < 0.0
        });
        for corner in 0..3 {
            let i = tri[corner];
            let j = tri[(corner + 1) % 3];
            let k = tri[(corner + 2) % 3];
            // Angle at k is opposite edge (i, j); angle at j is opposite edge (i, k).
            let cot_k = cot(v[i] - v[k], v[j] - v[k]);
            let cot_j = cot(v[i] - v[j], v[k] - v[j]);
            laplace[i] += (v[j] - v[i]) * cot_k + (v[k] - v[i]) * cot_j;
            area[i] += match (area_kind, obtuse_corner) {
                (VertexArea::Barycentric, _) => face_area / 3.0,
                (VertexArea::MixedVoronoi, None) => {
                    ((v[j] - v[i]).norm_squared() * cot_k + (v[k] - v[i]).norm_squared() * cot_j) / 8.0
                }
                (VertexArea::MixedVoronoi, Some(c)) if c == corner => face_area / 2.0,
                (VertexArea::MixedVoronoi, Some(_)) => face_area / 4.0,
            };
        }
    }
    let values = (0..mesh.vertex_count())
        .map(|i| {
            if boundary[i] || area[i] <= 0.0 {
                0.0
            } else {
                let h = laplace[i].norm() / (4.0 * area[i]);
                if h.is_finite() {
                    h
                } else {
                    0.0
                }
            }
        })
        .collect();
    CurvatureField {
        field: ScalarField {
            name: String::from("abs_mean_curvature"),
            values,
        },
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn flat_grid_interior_is_zero() {
        let m = shapes::grid(6, 6, 0.7);
        let c = cotangent_mean_curvature(&m);
        for (i, &h) in c.field.values.iter().enumerate() {
            assert!(h <= 1e-9, "vertex {i}: {h}");
        }
        assert!(c.boundary[0]);
        assert!(!c.boundary[3 * 7 + 3]);
    }

    #[test]
    fn icosphere_curvature_is_inverse_radius() {
        for radius in [1.0, 2.5] {
            let m = shapes::icosphere(4, radius);
            let c = cotangent_mean_curvature(&m);
            for &h in &c.field.values {
                assert!((h * radius - 1.0).abs() < 0.05, "{h}");
            }
        }
    }

    #[test]
    fn barycentric_area_is_biased_only_at_irregular_vertices() {
        let m = shapes::icosphere(4, 1.0);
        let c = cotangent_mean_curvature_with(&m, VertexArea::Barycentric);
        let bad: Vec<usize> = (0..m.vertex_count())
            .filter(|&i| (c.field.values[i] - 1.0).abs() > 0.05)
            .collect();
        // Only the twelve valence-5 vertices of the base icosahedron.
        assert_eq!(bad, (0..12).collect::<Vec<_>>());
        let mean = c.field.values.iter().sum::<f64>() / m.vertex_count() as f64;
        assert!((mean - 1.0).abs() < 1e-3);
    }

    #[test]
    fn percentile_by_rank() {
        let f = ScalarField { name: "x".into(), values: (1..=100).map(f64::from).collect() };
        assert_eq!(f.percentile(99.0), 99.0);
        assert_eq!(f.percentile(100.0), 100.0);
        assert_eq!(f.percentile(0.0), 1.0);
    }
}
