use pbe_core::mesh::*;
use proptest::prelude::*;

fn two_tets() -> SimplicialMesh {
    let v = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 1.0, 1.0),
    ];
    let cells = vec![[0, 1, 2, 3], [1, 2, 3, 4]];
    let mut cells = cells;
    for c in cells.iter_mut() {
        let p = [v[c[0]], v[c[1]], v[c[2]], v[c[3]]];
        if signed_volume(p[0], p[1], p[2], p[3]) < 0.0 {
            c.swap(2, 3);
        }
    }
    SimplicialMesh::from_tagged_cells(v, cells, vec![Region::Molecular, Region::Solvent]).unwrap()
}

fn total_volume(m: &SimplicialMesh) -> f64 {
    (0..m.num_cells()).map(|c| m.cell_volume(c)).sum()
}

fn region_volume(m: &SimplicialMesh, r: Region) -> f64 {
    (0..m.num_cells()).filter(|&c| m.region(c) == r).map(|c| m.cell_volume(c)).sum()
}

fn interface_area(m: &SimplicialMesh) -> f64 {
    m.interface_facets().iter().map(|f| m.facet_normal_area(*f).1).sum()
}

#[test]
fn ball_mesh_shells_lie_on_spheres() {
    let m = build_ball_mesh(2.0, 20.0, 3, 1).unwrap();
    m.validate().unwrap();
    let iv = m.interface_vertices();
    assert!(!iv.is_empty());
    for v in &iv {
        let r = m.vertices()[*v].norm();
        assert!((r - 2.0).abs() <= 1e-12 * 2.0, "interface vertex at radius {r}");
    }
    for v in m.outer_vertices() {
        let r = m.vertices()[v].norm();
        assert!((r - 20.0).abs() <= 1e-12 * 20.0);
    }
    for f in m.interface_facets() {
        assert_eq!(m.region(f.cell), Region::Molecular);
    }
    assert!(m.min_dihedral_angle_deg() > 5.0);
}

#[test]
fn ball_mesh_rejects_bad_parameters() {
    assert!(build_ball_mesh(2.0, 1.0, 3, 1).is_err());
    assert!(build_ball_mesh(2.0, 20.0, 1, 1).is_err());
    assert!(build_ball_mesh(-1.0, 20.0, 3, 1).is_err());
    let strict = BallMeshParams { min_dihedral_deg: 89.0, surface_subdivisions: 1, ..Default::default() };
    assert!(matches!(build_ball_mesh_with(&strict), Err(MeshError::PoorQuality { .. })));
}

#[test]
fn uniform_refinement_multiplies_cells_and_facets() {
    let m = build_ball_mesh(2.0, 20.0, 2, 0).unwrap();
    let r = refine_uniform(&m);
    r.validate().unwrap();
    assert_eq!(r.num_cells(), 8 * m.num_cells());
    assert_eq!(r.interface_facets().len(), 4 * m.interface_facets().len());
    assert_eq!(r.outer_facets().len(), 4 * m.outer_facets().len());
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(total_volume(&r), total_volume(&m)) < 1e-12);
    assert!(rel(region_volume(&r, Region::Molecular), region_volume(&m, Region::Molecular)) < 1e-12);
    assert!(rel(interface_area(&r), interface_area(&m)) < 1e-12);
    assert!(m.min_dihedral_angle_deg() > 0.0);
    let r2 = refine_uniform(&r);
    r2.validate().unwrap();
}

#[test]
fn uniform_refinement_keeps_new_vertices_on_flat_facets() {
    let m = build_ball_mesh(2.0, 20.0, 2, 0).unwrap();
    let r = refine_uniform(&m);
    for f in r.interface_facets() {
        let [a, b, c] = r.facet_vertices(*f).map(|v| r.vertices()[v]);
        // every refined interface triangle lies in the plane of a coarse facet
        let on_some = m.interface_facets().iter().any(|g| {
            let (n, _) = m.facet_normal_area(*g);
            let p0 = m.vertices()[m.facet_vertices(*g)[0]];
            [a, b, c].iter().all(|q| (*q - p0).dot(n).abs() < 1e-12)
        });
        assert!(on_some);
    }
}

#[test]
fn marked_refinement_two_tets() {
    let m = two_tets();
    let marked: CellSet = [0].into_iter().collect();
    let r = refine_marked(&m, &marked).unwrap();
    r.validate().unwrap();
    assert!(r.num_cells() >= 3);
    assert!((total_volume(&r) - total_volume(&m)).abs() < 1e-14);
}

#[test]
fn marked_refinement_empty_set_is_identity() {
    let m = build_ball_mesh(2.0, 20.0, 2, 0).unwrap();
    let r = refine_marked(&m, &CellSet::new()).unwrap();
    assert_eq!(r, m);
}

#[test]
fn marked_refinement_split_all_edges_on_interface_cells() {
    let m = build_ball_mesh(2.0, 20.0, 3, 1).unwrap();
    let marked = m.cells_touching_interface();
    let r = refine_marked_with(&m, &marked, MarkedMode::SplitAllEdges).unwrap();
    r.validate().unwrap();
    assert!(r.interface_facets().len() >= 4 * m.interface_facets().len());
    assert!((interface_area(&r) - interface_area(&m)).abs() < 1e-12 * interface_area(&m));
    assert!(r.min_dihedral_angle_deg() > 1.0);
}

#[test]
fn write_read_round_trip_is_exact() {
    let m = refine_uniform(&build_ball_mesh(2.0, 20.0, 2, 0).unwrap());
    let text = write_mesh(&m);
    let back = read_mesh(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(write_mesh(&back), text);
    assert!(!text.contains('\r'));
}

#[test]
fn read_rejects_broken_files() {
    let m = two_tets();
    let text = write_mesh(&m);
    let bad_header = text.replacen("pbemesh 1", "pbemesh 2", 1);
    assert!(matches!(read_mesh(&bad_header), Err(MeshError::Parse { line: 1, .. })));
    let truncated: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
    assert!(matches!(read_mesh(&truncated), Err(MeshError::Parse { .. })));
    // flip a cell orientation
    let flipped = text.replacen("0 1 2 3 molecular", "0 1 3 2 molecular", 1);
    if flipped != text {
        assert!(read_mesh(&flipped).is_err());
    }
    // drop the outer facet list entries
    let idx = text.find("outer_facets").unwrap();
    let cut = format!("{}outer_facets 0\n", &text[..idx]);
    assert!(matches!(read_mesh(&cut), Err(MeshError::InvariantViolation(_))));
}

#[test]
fn locate_finds_cells() {
    let m = build_ball_mesh(2.0, 20.0, 3, 1).unwrap();
    for p in [Point3::new(0.1, 0.2, -0.3), Point3::new(5.0, -3.0, 1.0), Point3::ORIGIN] {
        let loc = m.locate(p).expect("inside");
        let pts = m.cell_points(loc.cell);
        let mut q = Point3::ORIGIN;
        for k in 0..4 {
            q += pts[k] * loc.bary[k];
        }
        assert!(q.distance(p) < 1e-12);
    }
    assert!(m.locate(Point3::new(30.0, 0.0, 0.0)).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_marked_refinement_stays_conforming(seed in 0u64..1_000_000, frac in 0.02f64..0.3) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = build_ball_mesh(2.0, 20.0, 2, 0).unwrap();
        let marked: CellSet = (0..m.num_cells()).filter(|_| rng.gen::<f64>() < frac).collect();
        let mode = [MarkedMode::Bisect, MarkedMode::SplitAllEdges, MarkedMode::RedGreen][(seed % 3) as usize];
        let r = refine_marked_with(&m, &marked, mode).unwrap();
        prop_assert!(r.validate().is_ok());
        prop_assert!((total_volume(&r) - total_volume(&m)).abs() < 1e-10 * total_volume(&m));
        prop_assert!((region_volume(&r, Region::Molecular) - region_volume(&m, Region::Molecular)).abs() < 1e-10);
        prop_assert!(r.num_cells() >= m.num_cells() + marked.len());
        for v in r.interface_vertices() {
            prop_assert!(r.vertices()[v].norm() <= 2.0 + 1e-12);
        }
    }
}

#[test]
fn snapping_puts_shells_back_on_spheres() {
    let m = build_ball_mesh(2.0, 20.0, 2, 1).unwrap();
    let r = snap_to_ball(&refine_uniform(&m), 2.0, 20.0).unwrap();
    r.validate().unwrap();
    for v in r.interface_vertices() {
        assert!((r.vertices()[v].norm() - 2.0).abs() < 1e-12);
    }
    for v in r.outer_vertices() {
        assert!((r.vertices()[v].norm() - 20.0).abs() < 1e-12);
    }
    let ball = 4.0 / 3.0 * std::f64::consts::PI * 8.0;
    let flat = region_volume(&m, Region::Molecular);
    let snapped = region_volume(&r, Region::Molecular);
    assert!(flat < snapped && snapped < ball);
}

#[test]
fn red_green_marks_only_needed_neighbours() {
    let m = build_ball_mesh(2.0, 20.0, 2, 0).unwrap();
    let marked = m.cells_touching_interface();
    let r = refine_marked_with(&m, &marked, MarkedMode::RedGreen).unwrap();
    r.validate().unwrap();
    assert!(r.num_cells() >= m.num_cells() + 7 * marked.len());
    assert!(r.num_cells() < 8 * m.num_cells());
    assert!((total_volume(&r) - total_volume(&m)).abs() < 1e-10 * total_volume(&m));
}
