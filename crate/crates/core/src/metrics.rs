//! Error metrics against a ground-truth reference mesh.

use alloc::vec::Vec;

use crate::exec::Executor;
use crate::geom::{angle_between, Vec3};
use crate::mesh::{MeshError, TriMesh};

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub msae_degrees: f64,
    pub e_v: f64,
}

/// Mean angle (degrees) between corresponding face normals, skipping faces
/// degenerate in either mesh. With `orientation_agnostic`, each angle `θ` is
/// replaced by `min(θ, 180° − θ)`.
pub fn msae(result: &TriMesh, reference: &TriMesh, orientation_agnostic: bool) -> Result<f64, MeshError> {
    msae_normals(result.face_normals(), result.degenerate(), reference, orientation_agnostic)
}

/// Same as [`msae`] for a bare normal array (e.g. filtered normals before the vertex update).
pub fn msae_normals(
    normals: &[Vec3],
    degenerate: &[bool],
    reference: &TriMesh,
    orientation_agnostic: bool,
) -> Result<f64, MeshError> {
    if normals.len() != reference.face_count() {
        return Err(MeshError::FaceCountMismatch(normals.len(), reference.face_count()));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in 0..normals.len() {
        if degenerate[f] || reference.is_degenerate(f) {
            continue;
        }
        let mut theta = angle_between(normals[f], reference.face_normals()[f]).to_degrees();
        if orientation_agnostic {
            theta = theta.min(180.0 - theta);
        }
        sum += theta;
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Closest point on triangle `(a, b, c)` to `p`, by Voronoi-region classification.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = va + vb + vc;
    if denom == 0.0 {
        // Degenerate triangle: fall back to the closest of its edges.
        return [(a, b), (b, c), (c, a)]
            .into_iter()
            .map(|(s, e)| closest_point_on_segment(p, s, e))
            .min_by(|x, y| x.distance(p).total_cmp(&y.distance(p)))
            .unwrap();
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}

pub fn closest_point_on_segment(p: Vec3, a: Vec3, b: Vec3) -> Vec3 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

pub fn point_triangle_distance(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    closest_point_on_triangle(p, a, b, c).distance(p)
}

/// Distance from `p` to the closest triangle of `mesh` (brute force).
pub fn point_mesh_distance(p: Vec3, mesh: &TriMesh) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.face_positions(f);
            point_triangle_distance(p, a, b, c)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `sqrt( Σ_i (Σ_{j ∈ star(i)} A_j) · dist(v_i, reference)² / (3 Σ_k A_k) )`,
/// with areas taken from `result`.
pub fn vertex_error_ev<E: Executor>(result: &TriMesh, reference: &TriMesh, exec: &E) -> Result<f64, MeshError> {
    if reference.face_count() == 0 {
        return Err(MeshError::Empty);
    }
    let areas = result.face_areas();
    let total_area: f64 = areas.iter().sum();
    if total_area == 0.0 {
        return Ok(0.0);
    }
    let terms: Vec<f64> = exec.map_indexed(result.vertex_count(), || (), |_, i| {
        let star_area: f64 = result.vertex_star(i).iter().map(|&f| areas[f]).sum();
        if star_area == 0.0 {
            return 0.0;
        }
        let d = point_mesh_distance(result.vertices()[i], reference);
        star_area * d * d
    });
    Ok(libm::sqrt(terms.iter().sum::<f64>() / (3.0 * total_area)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::geom::rotation;
    use crate::shapes;

    #[test]
    fn identical_meshes_have_zero_error() {
        let m = shapes::subdivided_cube(3, 1.0);
        assert_eq!(msae(&m, &m, false).unwrap(), 0.0);
        assert_eq!(vertex_error_ev(&m, &m, &Serial).unwrap(), 0.0);
    }

    #[test]
    fn constant_rotation_gives_constant_angle() {
        let m = shapes::grid(3, 3, 1.0);
        let r = rotation(Vec3::X, 10f64.to_radians());
        let rotated = TriMesh::new(m.vertices().iter().map(|&v| r.mul_vec(v)).collect(), m.faces().to_vec()).unwrap();
        let e = msae(&rotated, &m, false).unwrap();
        assert!((e - 10.0).abs() < 1e-9);
    }

    #[test]
    fn orientation_agnostic_ignores_winding() {
        let m = shapes::icosphere(1, 1.0);
        let flipped = m.reversed();
        assert!((msae(&flipped, &m, false).unwrap() - 180.0).abs() < 1e-9);
        assert!(msae(&flipped, &m, true).unwrap() < 1e-9);
    }

    #[test]
    fn face_count_mismatch() {
        let a = shapes::grid(2, 2, 1.0);
        let b = shapes::grid(3, 2, 1.0);
        assert!(matches!(msae(&a, &b, false), Err(MeshError::FaceCountMismatch(8, 12))));
    }

    #[test]
    fn lifted_vertex_error_matches_hand_formula() {
        // Two triangles forming a unit square; lift vertex 2 by h.
        let flat = TriMesh::new(
            alloc::vec![Vec3::ZERO, Vec3::X, Vec3::new(1.0, 1.0, 0.0), Vec3::Y],
            alloc::vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let h = 0.01;
        let mut lifted = flat.clone();
        let mut p = flat.vertices().to_vec();
        p[2].z = h;
        lifted.set_vertices(p);
        let star: f64 = lifted.vertex_star(2).iter().map(|&f| lifted.face_areas()[f]).sum();
        let total: f64 = lifted.face_areas().iter().sum();
        let expect = h * (star / (3.0 * total)).sqrt();
        let got = vertex_error_ev(&lifted, &flat, &Serial).unwrap();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (Vec3::ZERO, Vec3::X, Vec3::Y);
        assert!((closest_point_on_triangle(Vec3::new(0.2, 0.2, 1.0), a, b, c) - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(closest_point_on_triangle(Vec3::new(-1.0, -1.0, 0.0), a, b, c), a);
        assert_eq!(closest_point_on_triangle(Vec3::new(0.5, -2.0, 0.0), a, b, c), Vec3::new(0.5, 0.0, 0.0));
        let hyp = closest_point_on_triangle(Vec3::new(1.0, 1.0, 0.0), a, b, c);
        assert!((hyp - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }
}
