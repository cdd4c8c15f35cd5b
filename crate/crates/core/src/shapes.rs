//! Procedural test and benchmark meshes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geom::Vec3;
use crate::mesh::TriMesh;

/// Flat `nx × ny` quad grid in the `z = 0` plane, two triangles per quad with
/// a consistent diagonal (interior vertices have valence 6), normals along `+z`.
pub fn grid(nx: usize, ny: usize, spacing: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (p00, p10, p11, p01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([p00, p10, p11]);
            faces.push([p00, p11, p01]);
        }
    }
    TriMesh::new(vertices, faces).expect("grid is well formed")
}

/// Regular tetrahedron with outward-facing normals.
pub fn tetrahedron() -> TriMesh {
    let vertices = alloc::vec![
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, -1.0),
        Vec3::new(-1.0, 1.0, -1.0),
        Vec3::new(-1.0, -1.0, 1.0),
    ];
    let faces = alloc::vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriMesh::new(vertices, faces).expect("tetrahedron is well formed")
}

/// Axis-aligned unit cube `[0,1]³` in the standard 8-vertex, 12-triangle tessellation.
pub fn unit_cube() -> TriMesh {
    subdivided_cube(1, 1.0)
}

/// Closed cube of side `side` centered at `side/2·(1,1,1)`, each face split
/// into an `n × n` grid of quads (two triangles each), outward orientation.
/// Face count is `12·n²`.
pub fn subdivided_cube(n: usize, side: f64) -> TriMesh {
    assert!(n >= 1);
    let mut index: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut vertex = |p: [usize; 3]| -> usize {
        *index.entry(p).or_insert_with(|| {
            vertices.push(Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * (side / n as f64));
            vertices.len() - 1
        })
    };

    let mut faces = Vec::with_capacity(12 * n * n);
    for axis in 0..3 {
        for &high in &[false, true] {
            let u_axis = (axis + 1) % 3;
            let v_axis = (axis + 2) % 3;
            // (u_axis, v_axis, axis) is a cyclic permutation, so u × v = +axis.
            let outward_positive = high;
            let fixed = if high { n } else { 0 };
            for a in 0..n {
                for b in 0..n {
                    let at = |du: usize, dv: usize| {
                        let mut p = [0; 3];
                        p[axis] = fixed;
                        p[u_axis] = a + du;
                        p[v_axis] = b + dv;
                        p
                    };
                    let p00 = vertex(at(0, 0));
                    let p10 = vertex(at(1, 0));
                    let p11 = vertex(at(1, 1));
                    let p01 = vertex(at(0, 1));
                    if outward_positive {
                        faces.push([p00, p10, p11]);
                        faces.push([p00, p11, p01]);
                    } else {
                        faces.push([p00, p11, p10]);
                        faces.push([p00, p01, p11]);
                    }
                }
            }
        }
    }
    TriMesh::new(vertices, faces).expect("cube is well formed")
}

/// Icosahedron subdivided `level` times (each triangle into four), projected
/// onto a sphere of the given radius centered at the origin.
pub fn icosphere(level: usize, radius: f64) -> TriMesh {
    let t = (1.0 + libm::sqrt(5.0)) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).try_normalize().unwrap())
    .collect();
    let mut faces: Vec<[usize; 3]> = alloc::vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoint.entry(key).or_insert_with(|| {
                let m = ((vertices[a] + vertices[b]) * 0.5).try_normalize().unwrap();
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    TriMesh::new(vertices, faces).expect("icosphere is well formed")
}

/// Open cylinder of `radius` around the `z` axis, `height` tall, with
/// `segments` around and `rings` quads along the axis, outward normals.
pub fn cylinder(radius: f64, height: f64, segments: usize, rings: usize) -> TriMesh {
    let mut vertices = Vec::with_capacity(segments * (rings + 1));
    for j in 0..=rings {
        let z = height * j as f64 / rings as f64;
        for i in 0..segments {
            let a = 2.0 * PI * i as f64 / segments as f64;
            vertices.push(Vec3::new(radius * libm::cos(a), radius * libm::sin(a), z));
        }
    }
    let idx = |i: usize, j: usize| j * segments + (i % segments);
    let mut faces = Vec::with_capacity(2 * segments * rings);
    for j in 0..rings {
        for i in 0..segments {
            let (p00, p10, p11, p01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([p00, p10, p11]);
            faces.push([p00, p11, p01]);
        }
    }
    TriMesh::new(vertices, faces).expect("cylinder is well formed")
}

/// Two parallel `n × n` grids of the given spacing, separated by `gap` along `z`.
/// Faces of the lower sheet come first.
pub fn two_sheets(n: usize, spacing: f64, gap: f64) -> TriMesh {
    let lower = grid(n, n, spacing);
    let offset = lower.vertex_count();
    let mut vertices = lower.vertices().to_vec();
    vertices.extend(lower.vertices().iter().map(|&v| v + Vec3::new(0.0, 0.0, gap)));
    let mut faces = lower.faces().to_vec();
    faces.extend(
        lower
            .faces()
            .iter()
            .map(|&[a, b, c]| [a + offset, b + offset, c + offset]),
    );
    TriMesh::new(vertices, faces).expect("sheets are well formed")
}
