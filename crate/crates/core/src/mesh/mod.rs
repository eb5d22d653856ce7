//! Tetrahedral meshes of a ball split into a molecular core and a solvent shell.
//!
//! Local face `f` of a cell is the face opposite local vertex `f`.
//! Local edge `k` joins the local vertices `EDGE_VERTICES[k]`.

mod ball;
mod io;
mod locate;
mod point;
mod refine;

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

pub use ball::{build_ball_mesh, build_ball_mesh_with, snap_to_ball, BallMeshParams};
pub use io::{read_mesh, read_mesh_file, write_mesh, write_mesh_file};
pub use locate::{CellLocator, Location};
pub use point::{point_triangle_distance, signed_volume, Point3};
pub use refine::{refine_around_points, refine_marked, refine_marked_with, refine_uniform, MarkedMode};

/// Local vertex triples of the four faces; face `f` omits vertex `f`.
pub const FACE_VERTICES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Local vertex pairs of the six edges.
pub const EDGE_VERTICES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("degenerate element: cell {cell} has volume {volume:e}")]
    DegenerateElement { cell: usize, volume: f64 },
    #[error("minimum dihedral angle {angle_deg:.3} deg is below the floor {floor_deg:.3} deg")]
    PoorQuality { angle_deg: f64, floor_deg: f64 },
    #[error("invalid mesh parameters: {0}")]
    InvalidParameters(String),
    #[error("mesh invariant violated: {0}")]
    InvariantViolation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("refinement closure exceeded the cascade depth {0}")]
    NonTermination(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Region tag of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Molecular,
    Solvent,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Molecular => "molecular",
            Region::Solvent => "solvent",
        }
    }
}

/// A cell face identified by the owning cell and its local face index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetRef {
    pub cell: usize,
    pub face: u8,
}

/// A sorted set of cell indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CellSet(pub BTreeSet<usize>);

impl CellSet {
    pub fn new() -> Self {
        CellSet(BTreeSet::new())
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn contains(&self, c: usize) -> bool {
        self.0.contains(&c)
    }
    pub fn insert(&mut self, c: usize) -> bool {
        self.0.insert(c)
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
    pub fn union_with(&mut self, other: &CellSet) {
        self.0.extend(other.0.iter().copied());
    }
}

impl FromIterator<usize> for CellSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        CellSet(iter.into_iter().collect())
    }
}

/// Edge numbering of a mesh: sorted vertex pairs and per-cell edge indices.
#[derive(Clone, Debug)]
pub struct EdgeTable {
    pub edges: Vec<[usize; 2]>,
    pub cell_edges: Vec<[usize; 6]>,
}

#[derive(Debug)]
pub struct SimplicialMesh {
    vertices: Vec<Point3>,
    cells: Vec<[usize; 4]>,
    regions: Vec<Region>,
    interface_facets: Vec<FacetRef>,
    outer_facets: Vec<FacetRef>,
    edges: OnceLock<EdgeTable>,
    locator: OnceLock<CellLocator>,
}

impl Clone for SimplicialMesh {
    fn clone(&self) -> Self {
        SimplicialMesh::from_parts_unchecked(
            self.vertices.clone(),
            self.cells.clone(),
            self.regions.clone(),
            self.interface_facets.clone(),
            self.outer_facets.clone(),
        )
    }
}

impl PartialEq for SimplicialMesh {
    fn eq(&self, o: &Self) -> bool {
        self.vertices == o.vertices
            && self.cells == o.cells
            && self.regions == o.regions
            && self.interface_facets == o.interface_facets
            && self.outer_facets == o.outer_facets
    }
}

pub(crate) fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

impl SimplicialMesh {
    /// Builds a mesh from explicit facet lists and checks every invariant.
    pub fn new(
        vertices: Vec<Point3>,
        cells: Vec<[usize; 4]>,
        regions: Vec<Region>,
        interface_facets: Vec<FacetRef>,
        outer_facets: Vec<FacetRef>,
    ) -> Result<Self, MeshError> {
        let mut m = Self::from_parts_unchecked(vertices, cells, regions, interface_facets, outer_facets);
        m.interface_facets.sort_unstable();
        m.outer_facets.sort_unstable();
        m.validate()?;
        Ok(m)
    }

    /// Builds a mesh whose facet lists are derived from the cells: faces used
    /// once are outer facets, faces between regions are interface facets owned
    /// by the molecular cell.
    pub fn from_tagged_cells(
        vertices: Vec<Point3>,
        cells: Vec<[usize; 4]>,
        regions: Vec<Region>,
    ) -> Result<Self, MeshError> {
        if cells.len() != regions.len() {
            return Err(MeshError::InvariantViolation(format!(
                "{} cells but {} region tags",
                cells.len(),
                regions.len()
            )));
        }
        check_cell_indices(&vertices, &cells)?;
        let faces = face_map(&cells);
        let mut interface = Vec::new();
        let mut outer = Vec::new();
        for (key, users) in &faces {
            match users.as_slice() {
                [a] => outer.push(*a),
                [a, b] => {
                    let (ra, rb) = (regions[a.cell], regions[b.cell]);
                    if ra != rb {
                        interface.push(if ra == Region::Molecular { *a } else { *b });
                    }
                }
                _ => {
                    return Err(MeshError::InvariantViolation(format!(
                        "face {key:?} is shared by {} cells",
                        users.len()
                    )))
                }
            }
        }
        interface.sort_unstable();
        outer.sort_unstable();
        let m = Self::from_parts_unchecked(vertices, cells, regions, interface, outer);
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(
        vertices: Vec<Point3>,
        cells: Vec<[usize; 4]>,
        regions: Vec<Region>,
        interface_facets: Vec<FacetRef>,
        outer_facets: Vec<FacetRef>,
    ) -> Self {
        SimplicialMesh {
            vertices,
            cells,
            regions,
            interface_facets,
            outer_facets,
            edges: OnceLock::new(),
            locator: OnceLock::new(),
        }
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }
    pub fn cells(&self) -> &[[usize; 4]] {
        &self.cells
    }
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }
    pub fn interface_facets(&self) -> &[FacetRef] {
        &self.interface_facets
    }
    pub fn outer_facets(&self) -> &[FacetRef] {
        &self.outer_facets
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }
    pub fn region(&self, cell: usize) -> Region {
        self.regions[cell]
    }

    pub fn cell_points(&self, cell: usize) -> [Point3; 4] {
        let c = self.cells[cell];
        [
            self.vertices[c[0]],
            self.vertices[c[1]],
            self.vertices[c[2]],
            self.vertices[c[3]],
        ]
    }

    pub fn cell_volume(&self, cell: usize) -> f64 {
        let p = self.cell_points(cell);
        signed_volume(p[0], p[1], p[2], p[3])
    }

    /// Global vertex indices of a facet, in local face order.
    pub fn facet_vertices(&self, f: FacetRef) -> [usize; 3] {
        let c = self.cells[f.cell];
        let lv = FACE_VERTICES[f.face as usize];
        [c[lv[0]], c[lv[1]], c[lv[2]]]
    }

    /// Unit normal of a facet pointing away from its owning cell, and its area.
    pub fn facet_normal_area(&self, f: FacetRef) -> (Point3, f64) {
        let [a, b, c] = self.facet_vertices(f).map(|v| self.vertices[v]);
        let opp = self.vertices[self.cells[f.cell][f.face as usize]];
        let mut n = (b - a).cross(c - a);
        let len = n.norm();
        if n.dot(opp - a) > 0.0 {
            n = -n;
        }
        (n * (1.0 / len), 0.5 * len)
    }

    pub fn edge_table(&self) -> &EdgeTable {
        self.edges.get_or_init(|| {
            let mut index: HashMap<[usize; 2], usize> = HashMap::with_capacity(self.cells.len() * 2);
            let mut edges = Vec::new();
            let cell_edges = self
                .cells
                .iter()
                .map(|c| {
                    let mut ce = [0usize; 6];
                    for (k, [i, j]) in EDGE_VERTICES.iter().enumerate() {
                        let (a, b) = (c[*i].min(c[*j]), c[*i].max(c[*j]));
                        ce[k] = *index.entry([a, b]).or_insert_with(|| {
                            edges.push([a, b]);
                            edges.len() - 1
                        });
                    }
                    ce
                })
                .collect();
            EdgeTable { edges, cell_edges }
        })
    }

    pub fn locator(&self) -> &CellLocator {
        self.locator.get_or_init(|| CellLocator::new(self))
    }

    /// Locates the cell containing `p`, if any.
    pub fn locate(&self, p: Point3) -> Option<Location> {
        self.locator().locate(self, p)
    }

    /// Molecular cells with a face on the interface.
    pub fn cells_touching_interface(&self) -> CellSet {
        self.interface_facets.iter().map(|f| f.cell).collect()
    }

    /// Cells with a face on the outer boundary.
    pub fn cells_touching_outer_boundary(&self) -> CellSet {
        self.outer_facets.iter().map(|f| f.cell).collect()
    }

    pub fn cells_in_region(&self, region: Region) -> CellSet {
        (0..self.cells.len()).filter(|&c| self.regions[c] == region).collect()
    }

    /// Vertices lying on interface facets.
    pub fn interface_vertices(&self) -> BTreeSet<usize> {
        self.interface_facets
            .iter()
            .flat_map(|f| self.facet_vertices(*f))
            .collect()
    }

    /// Vertices lying on outer facets.
    pub fn outer_vertices(&self) -> BTreeSet<usize> {
        self.outer_facets
            .iter()
            .flat_map(|f| self.facet_vertices(*f))
            .collect()
    }

    /// Smallest dihedral angle over all cells, in degrees.
    pub fn min_dihedral_angle_deg(&self) -> f64 {
        (0..self.cells.len())
            .map(|c| min_dihedral_deg(&self.cell_points(c)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks positivity, conformity and facet tagging.
    pub fn validate(&self) -> Result<(), MeshError> {
        let bad = |m: String| Err(MeshError::InvariantViolation(m));
        if self.cells.len() != self.regions.len() {
            return bad(format!("{} cells but {} region tags", self.cells.len(), self.regions.len()));
        }
        if let Some(v) = self.vertices.iter().position(|p| !p.is_finite()) {
            return bad(format!("vertex {v} has non-finite coordinates"));
        }
        check_cell_indices(&self.vertices, &self.cells)?;
        for c in 0..self.cells.len() {
            let vol = self.cell_volume(c);
            if !(vol > 0.0) {
                return Err(MeshError::DegenerateElement { cell: c, volume: vol });
            }
        }
        let faces = face_map(&self.cells);
        let mut expected_outer = BTreeSet::new();
        let mut expected_interface = BTreeSet::new();
        for (key, users) in &faces {
            match users.as_slice() {
                [a] => {
                    expected_outer.insert(*a);
                }
                [a, b] => {
                    let (ra, rb) = (self.regions[a.cell], self.regions[b.cell]);
                    if ra != rb {
                        expected_interface.insert(if ra == Region::Molecular { *a } else { *b });
                    }
                }
                _ => return bad(format!("face {key:?} is shared by {} cells", users.len())),
            }
        }
        for (name, list, expected) in [
            ("outer", &self.outer_facets, &expected_outer),
            ("interface", &self.interface_facets, &expected_interface),
        ] {
            let given: BTreeSet<FacetRef> = list.iter().copied().collect();
            if given.len() != list.len() {
                return bad(format!("duplicate {name} facet"));
            }
            if let Some(f) = list.iter().find(|f| f.cell >= self.cells.len() || f.face > 3) {
                return bad(format!("{name} facet {f:?} is out of range"));
            }
            if let Some(f) = given.difference(expected).next() {
                return bad(format!("{name} facet {f:?} does not lie on the {name}"));
            }
            if let Some(f) = expected.difference(&given).next() {
                return bad(format!("{name} face {f:?} is not tagged"));
            }
        }
        Ok(())
    }
}

fn check_cell_indices(vertices: &[Point3], cells: &[[usize; 4]]) -> Result<(), MeshError> {
    let n = vertices.len();
    for (c, cell) in cells.iter().enumerate() {
        if cell.iter().any(|&v| v >= n) {
            return Err(MeshError::InvariantViolation(format!(
                "cell {c} references a vertex out of range"
            )));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if cell[i] == cell[j] {
                    return Err(MeshError::InvariantViolation(format!(
                        "cell {c} repeats vertex {}",
                        cell[i]
                    )));
                }
            }
        }
    }
    Ok(())
}

fn face_map(cells: &[[usize; 4]]) -> HashMap<[usize; 3], Vec<FacetRef>> {
    let mut faces: HashMap<[usize; 3], Vec<FacetRef>> = HashMap::with_capacity(cells.len() * 2);
    for (c, cell) in cells.iter().enumerate() {
        for (f, lv) in FACE_VERTICES.iter().enumerate() {
            let key = sorted3([cell[lv[0]], cell[lv[1]], cell[lv[2]]]);
            faces.entry(key).or_default().push(FacetRef { cell: c, face: f as u8 });
        }
    }
    faces
}

/// Smallest dihedral angle of a tetrahedron, in degrees.
pub fn min_dihedral_deg(p: &[Point3; 4]) -> f64 {
    let mut normals = [Point3::ORIGIN; 4];
    for (f, lv) in FACE_VERTICES.iter().enumerate() {
        let (a, b, c) = (p[lv[0]], p[lv[1]], p[lv[2]]);
        let mut n = (b - a).cross(c - a);
        if n.dot(p[f] - a) > 0.0 {
            n = -n;
        }
        normals[f] = n * (1.0 / n.norm());
    }
    let mut min = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            let cos = (-normals[i].dot(normals[j])).clamp(-1.0, 1.0);
            min = min.min(cos.acos().to_degrees());
        }
    }
    min
}
