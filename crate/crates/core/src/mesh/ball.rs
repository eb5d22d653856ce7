use std::collections::HashMap;

use super::{signed_volume, MeshError, Point3, Region, SimplicialMesh};

/// Parameters of the layered-icosphere ball generator.
#[derive(Clone, Debug, PartialEq)]
pub struct BallMeshParams {
    /// Radius of the molecular ball; a vertex shell lies exactly on it.
    pub molecular_radius: f64,
    /// Radius of the truncated domain; a vertex shell lies exactly on it.
    pub outer_radius: f64,
    /// Number of vertex shells inside the molecular ball, the interface shell included.
    pub layers: usize,
    /// Icosahedron subdivision level of every shell.
    pub surface_subdivisions: u32,
    /// Number of solvent shells; chosen from the surface resolution when absent.
    pub solvent_layers: Option<usize>,
    /// Smallest admissible dihedral angle in degrees.
    pub min_dihedral_deg: f64,
}

impl Default for BallMeshParams {
    fn default() -> Self {
        BallMeshParams {
            molecular_radius: 2.0,
            outer_radius: 20.0,
            layers: 4,
            surface_subdivisions: 2,
            solvent_layers: None,
            min_dihedral_deg: 5.0,
        }
    }
}

/// Builds a ball mesh with default solvent grading and quality floor.
pub fn build_ball_mesh(
    molecular_radius: f64,
    outer_radius: f64,
    layers: usize,
    surface_subdivisions: u32,
) -> Result<SimplicialMesh, MeshError> {
    build_ball_mesh_with(&BallMeshParams {
        molecular_radius,
        outer_radius,
        layers,
        surface_subdivisions,
        ..BallMeshParams::default()
    })
}

pub fn build_ball_mesh_with(p: &BallMeshParams) -> Result<SimplicialMesh, MeshError> {
    let invalid = |m: &str| Err(MeshError::InvalidParameters(m.to_string()));
    if !(p.molecular_radius > 0.0) || !p.molecular_radius.is_finite() {
        return invalid("molecular radius must be positive");
    }
    if !(p.outer_radius > p.molecular_radius) || !p.outer_radius.is_finite() {
        return invalid("outer radius must exceed the molecular radius");
    }
    if p.layers < 2 {
        return invalid("at least two molecular layers are required");
    }
    if p.surface_subdivisions > 6 {
        return invalid("surface subdivision level above 6 is not supported");
    }
    if p.solvent_layers == Some(0) {
        return invalid("at least one solvent layer is required");
    }

    let (sphere, triangles) = icosphere(p.surface_subdivisions);
    let mean_edge = mean_edge_length(&sphere, &triangles);

    let mut radii: Vec<f64> = (1..=p.layers)
        .map(|k| p.molecular_radius * k as f64 / p.layers as f64)
        .collect();
    radii[p.layers - 1] = p.molecular_radius;
    let ratio = p.outer_radius / p.molecular_radius;
    // Automatic grading keeps radial edges shorter than tangential ones, so
    // longest-edge closures stay within a shell.
    let n_solvent = p
        .solvent_layers
        .unwrap_or_else(|| (ratio.ln() / (1.0 + 0.75 * mean_edge).ln()).ceil().max(1.0) as usize);
    for k in 1..=n_solvent {
        radii.push(p.molecular_radius * ratio.powf(k as f64 / n_solvent as f64));
    }
    *radii.last_mut().unwrap() = p.outer_radius;

    let ns = sphere.len();
    let mut vertices = Vec::with_capacity(1 + ns * radii.len());
    vertices.push(Point3::ORIGIN);
    for &r in &radii {
        vertices.extend(sphere.iter().map(|u| *u * r));
    }
    let shell = |s: usize, v: usize| 1 + s * ns + v;

    let mut cells = Vec::new();
    let mut regions = Vec::new();
    for t in &triangles {
        cells.push([0, shell(0, t[0]), shell(0, t[1]), shell(0, t[2])]);
        regions.push(Region::Molecular);
    }
    for s in 0..radii.len() - 1 {
        let region = if s + 1 < p.layers { Region::Molecular } else { Region::Solvent };
        for t in &triangles {
            // Ascending global order fixes the quad diagonals consistently across prisms.
            let mut t = *t;
            t.sort_unstable();
            let (a, b, c) = (shell(s, t[0]), shell(s, t[1]), shell(s, t[2]));
            let (a2, b2, c2) = (shell(s + 1, t[0]), shell(s + 1, t[1]), shell(s + 1, t[2]));
            for tet in [[a, b, c, a2], [b, c, a2, b2], [c, a2, b2, c2]] {
                cells.push(tet);
                regions.push(region);
            }
        }
    }
    for c in cells.iter_mut() {
        orient(&vertices, c);
    }
    let mesh = SimplicialMesh::from_tagged_cells(vertices, cells, regions)?;
    let angle = mesh.min_dihedral_angle_deg();
    if angle < p.min_dihedral_deg {
        return Err(MeshError::PoorQuality { angle_deg: angle, floor_deg: p.min_dihedral_deg });
    }
    Ok(mesh)
}

/// Swaps two vertices when the cell is negatively oriented.
pub(crate) fn orient(vertices: &[Point3], c: &mut [usize; 4]) {
    let v = signed_volume(vertices[c[0]], vertices[c[1]], vertices[c[2]], vertices[c[3]]);
    if v < 0.0 {
        c.swap(2, 3);
    }
}

/// Unit icosphere: vertices on the unit sphere and triangles.
fn icosphere(level: u32) -> (Vec<Point3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|a| {
        let p = Point3::from(*a);
        p * (1.0 / p.norm())
    })
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
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
        let mut mid: HashMap<[usize; 2], usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point3>| -> usize {
            let key = [a.min(b), a.max(b)];
            *mid.entry(key).or_insert_with(|| {
                let m = verts[a].midpoint(verts[b]);
                verts.push(m * (1.0 / m.norm()));
                verts.len() - 1
            })
        };
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (verts, tris)
}

fn mean_edge_length(verts: &[Point3], tris: &[[usize; 3]]) -> f64 {
    let mut sum = 0.0;
    for t in tris {
        sum += verts[t[0]].distance(verts[t[1]])
            + verts[t[1]].distance(verts[t[2]])
            + verts[t[2]].distance(verts[t[0]]);
    }
    sum / (3 * tris.len()) as f64
}

/// Moves every interface vertex radially onto the sphere of radius
/// `molecular_radius` and every outer vertex onto `outer_radius`, both centred
/// at the origin. Used after refining a generated ball so that the polyhedral
/// surfaces converge to the spheres. Fails if a cell would invert.
pub fn snap_to_ball(
    mesh: &SimplicialMesh,
    molecular_radius: f64,
    outer_radius: f64,
) -> Result<SimplicialMesh, MeshError> {
    let mut vertices = mesh.vertices().to_vec();
    for (set, r) in [(mesh.interface_vertices(), molecular_radius), (mesh.outer_vertices(), outer_radius)] {
        for v in set {
            let n = vertices[v].norm();
            if n > 0.0 {
                vertices[v] = vertices[v] * (r / n);
            }
        }
    }
    for (c, cell) in mesh.cells().iter().enumerate() {
        let [a, b, cc, d] = cell.map(|v| vertices[v]);
        if signed_volume(a, b, cc, d) <= 0.0 {
            return Err(MeshError::DegenerateElement { cell: c, volume: signed_volume(a, b, cc, d) });
        }
    }
    SimplicialMesh::new(
        vertices,
        mesh.cells().to_vec(),
        mesh.regions().to_vec(),
        mesh.interface_facets().to_vec(),
        mesh.outer_facets().to_vec(),
    )
}
