use std::fs;

use envt::io::{load_mesh, save_mesh, IoError};
use envt_core::{shapes, TriMesh, Vec3};

#[test]
fn single_triangle_obj() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tri.obj");
    fs::write(&p, "v 0 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    let m = load_mesh(&p).unwrap();
    assert_eq!(m.face_count(), 1);
    assert!((m.face_areas()[0] - 1.0).abs() < 1e-15);
    assert_eq!(m.face_normals()[0], Vec3::Z);
}

#[test]
fn off_tetrahedron_is_closed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tet.off");
    fs::write(
        &p,
        "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n",
    )
    .unwrap();
    let m = load_mesh(&p).unwrap();
    assert_eq!(m.face_count(), 4);
    let report = m.check_orientation();
    assert_eq!(report.boundary_edges, 0);
    assert!(report.is_consistent());
    // Hand-computed: three right triangles of area 1/2 and one equilateral of side √2.
    let mut areas = m.face_areas().to_vec();
    areas.sort_by(f64::total_cmp);
    for a in &areas[..3] {
        assert!((a - 0.5).abs() < 1e-15);
    }
    assert!((areas[3] - 3f64.sqrt() / 2.0).abs() < 1e-15);
    for (f, n) in m.face_normals().iter().enumerate() {
        let [a, b, c] = m.face_positions(f);
        let cross = (b - a).cross(c - a);
        assert!((cross.norm() / 2.0 - m.face_areas()[f]).abs() < 1e-15);
        assert!((*n - cross * (1.0 / cross.norm())).norm() < 1e-15);
        // Outward: away from the interior point.
        assert!(n.dot(m.face_centroids()[f] - Vec3::new(0.2, 0.2, 0.2)) > 0.0);
    }
}

#[test]
fn quad_faces_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("quad.obj");
    fs::write(&p, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
    assert!(matches!(load_mesh(&p), Err(IoError::Parse { line: 5, .. })));
}

#[test]
fn unit_cube_round_trips_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cube = shapes::unit_cube();
    for name in ["cube.obj", "cube.off"] {
        let p = dir.path().join(name);
        save_mesh(&p, &cube).unwrap();
        let back = load_mesh(&p).unwrap();
        assert!(back.same_connectivity(&cube));
        for (a, b) in back.vertices().iter().zip(cube.vertices()) {
            assert!((*a - *b).norm() < 1e-9);
        }
    }
}

#[test]
fn positions_keep_nine_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let m = TriMesh::new(
        vec![
            Vec3::new(0.123456789123, -98765.4321987, 1e-7 / 3.0),
            Vec3::new(1.0 / 3.0, 2.0 / 3.0, 12345678.9),
            Vec3::new(-0.1, 0.2, -0.3),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    for name in ["p.obj", "p.off"] {
        let p = dir.path().join(name);
        save_mesh(&p, &m).unwrap();
        let back = load_mesh(&p).unwrap();
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-9 * b[k].abs(), "{} vs {}", a[k], b[k]);
            }
        }
    }
}

#[test]
fn faceless_mesh_saves_its_vertex_list() {
    let dir = tempfile::tempdir().unwrap();
    let m = TriMesh::new(vec![Vec3::ZERO, Vec3::X], Vec::new()).unwrap();
    let obj = dir.path().join("pts.obj");
    save_mesh(&obj, &m).unwrap();
    let text = fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 2);
    assert!(!text.lines().any(|l| l.starts_with("f ")));
    let off = dir.path().join("pts.off");
    save_mesh(&off, &m).unwrap();
    let text = fs::read_to_string(&off).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("OFF"));
    assert_eq!(lines.next().map(|l| l.split_whitespace().take(2).collect::<Vec<_>>()), Some(vec!["2", "0"]));
}

#[test]
fn off_to_obj_to_off_keeps_faces() {
    let dir = tempfile::tempdir().unwrap();
    let src = shapes::icosphere(2, 1.0);
    let a = dir.path().join("a.off");
    let b = dir.path().join("b.obj");
    let c = dir.path().join("c.off");
    save_mesh(&a, &src).unwrap();
    save_mesh(&b, &load_mesh(&a).unwrap()).unwrap();
    save_mesh(&c, &load_mesh(&b).unwrap()).unwrap();
    let back = load_mesh(&c).unwrap();
    assert_eq!(back.face_count(), src.face_count());
    assert_eq!(back.faces(), src.faces());
}
