use std::sync::{Arc, OnceLock};

use super::element::Degree;
use super::sparse::SparsityPattern;
use crate::mesh::{FacetRef, Point3, Region, SimplicialMesh, EDGE_VERTICES, FACE_VERTICES};

/// Cells on which a space lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Support {
    WholeDomain,
    MolecularOnly,
}

/// Geometric entity carrying a degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    Edge(usize),
}

const NONE: usize = usize::MAX;

/// Continuous Lagrange space on a mesh. Vertex dofs come first, in vertex
/// order, followed by edge dofs in edge-table order.
#[derive(Debug)]
pub struct FunctionSpace {
    mesh: Arc<SimplicialMesh>,
    degree: Degree,
    support: Support,
    cell_dofs: Vec<usize>,
    dof_entities: Vec<DofEntity>,
    dof_points: Vec<Point3>,
    boundary: Vec<bool>,
    pattern: OnceLock<Arc<SparsityPattern>>,
}

impl FunctionSpace {
    pub fn new(mesh: Arc<SimplicialMesh>, degree: Degree, support: Support) -> Arc<Self> {
        let nc = mesh.num_cells();
        let in_support = |c: usize| support == Support::WholeDomain || mesh.region(c) == Region::Molecular;
        let npc = degree.dofs_per_cell();
        let mut vmap = vec![NONE; mesh.num_vertices()];
        for c in 0..nc {
            if in_support(c) {
                for &v in &mesh.cells()[c] {
                    vmap[v] = 0;
                }
            }
        }
        let mut dof_entities = Vec::new();
        let mut dof_points = Vec::new();
        for (v, slot) in vmap.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = dof_entities.len();
                dof_entities.push(DofEntity::Vertex(v));
                dof_points.push(mesh.vertices()[v]);
            }
        }
        let mut emap = Vec::new();
        if degree == Degree::P2 {
            let table = mesh.edge_table();
            emap = vec![NONE; table.edges.len()];
            for c in 0..nc {
                if in_support(c) {
                    for &e in &table.cell_edges[c] {
                        emap[e] = 0;
                    }
                }
            }
            for (e, slot) in emap.iter_mut().enumerate() {
                if *slot == 0 {
                    *slot = dof_entities.len();
                    dof_entities.push(DofEntity::Edge(e));
                    let [a, b] = table.edges[e];
                    dof_points.push(mesh.vertices()[a].midpoint(mesh.vertices()[b]));
                }
            }
        }
        let mut cell_dofs = vec![NONE; nc * npc];
        for c in 0..nc {
            if !in_support(c) {
                continue;
            }
            let cell = mesh.cells()[c];
            for k in 0..4 {
                cell_dofs[c * npc + k] = vmap[cell[k]];
            }
            if degree == Degree::P2 {
                let ce = mesh.edge_table().cell_edges[c];
                for k in 0..6 {
                    cell_dofs[c * npc + 4 + k] = emap[ce[k]];
                }
            }
        }
        let mut boundary = vec![false; dof_entities.len()];
        let mut mark = |f: &FacetRef| {
            let base = f.cell * npc;
            let fv = FACE_VERTICES[f.face as usize];
            for &lv in &fv {
                boundary[cell_dofs[base + lv]] = true;
            }
            if degree == Degree::P2 {
                for (k, [i, j]) in EDGE_VERTICES.iter().enumerate() {
                    if *i != f.face as usize && *j != f.face as usize {
                        boundary[cell_dofs[base + 4 + k]] = true;
                    }
                }
            }
        };
        match support {
            Support::WholeDomain => mesh.outer_facets().iter().for_each(&mut mark),
            Support::MolecularOnly => {
                mesh.interface_facets().iter().for_each(&mut mark);
                mesh.outer_facets()
                    .iter()
                    .filter(|f| mesh.region(f.cell) == Region::Molecular)
                    .for_each(&mut mark);
            }
        }
        Arc::new(FunctionSpace {
            mesh,
            degree,
            support,
            cell_dofs,
            dof_entities,
            dof_points,
            boundary,
            pattern: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }
    pub fn degree(&self) -> Degree {
        self.degree
    }
    pub fn support(&self) -> Support {
        self.support
    }
    pub fn num_dofs(&self) -> usize {
        self.dof_entities.len()
    }
    pub fn dof_entity(&self, dof: usize) -> DofEntity {
        self.dof_entities[dof]
    }
    pub fn dof_point(&self, dof: usize) -> Point3 {
        self.dof_points[dof]
    }
    pub fn dof_points(&self) -> &[Point3] {
        &self.dof_points
    }
    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }
    pub fn boundary_dofs(&self) -> Vec<usize> {
        (0..self.num_dofs()).filter(|&d| self.boundary[d]).collect()
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        self.cell_dofs[cell * self.degree.dofs_per_cell()] != NONE
    }

    /// Cells belonging to the support, ascending.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mesh.num_cells()).filter(move |&c| self.contains_cell(c))
    }

    /// Global dofs of a support cell in local order.
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let n = self.degree.dofs_per_cell();
        &self.cell_dofs[cell * n..(cell + 1) * n]
    }

    pub fn same_mesh(&self, other: &FunctionSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    pub fn pattern(&self) -> Arc<SparsityPattern> {
        self.pattern.get_or_init(|| Arc::new(SparsityPattern::for_space(self))).clone()
    }
}
