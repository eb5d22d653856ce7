#![allow(dead_code)]

use pbe_core::mesh::{signed_volume, Point3, Region, SimplicialMesh};

/// Kuhn triangulation of `nx` unit cubes along x; cubes with index below
/// `molecular` are molecular, the rest solvent.
pub fn cube_row(nx: usize, molecular: usize) -> SimplicialMesh {
    let mut vertices = Vec::new();
    let id = |i: usize, j: usize, k: usize| (i * 2 + j) * 2 + k;
    for i in 0..=nx {
        for j in 0..2 {
            for k in 0..2 {
                vertices.push(Point3::new(i as f64, j as f64, k as f64));
            }
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::new();
    let mut regions = Vec::new();
    for c in 0..nx {
        for p in perms {
            let mut at = [c, 0, 0];
            let mut tet = [id(at[0], at[1], at[2]), 0, 0, 0];
            for (s, axis) in p.iter().enumerate() {
                at[*axis] += 1;
                tet[s + 1] = id(at[0], at[1], at[2]);
            }
            let pts = tet.map(|v| vertices[v]);
            if signed_volume(pts[0], pts[1], pts[2], pts[3]) < 0.0 {
                tet.swap(2, 3);
            }
            cells.push(tet);
            regions.push(if c < molecular { Region::Molecular } else { Region::Solvent });
        }
    }
    SimplicialMesh::from_tagged_cells(vertices, cells, regions).expect("valid cube row")
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
