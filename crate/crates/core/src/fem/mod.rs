//! Continuous P1/P2 Lagrange spaces on tetrahedra, assembly and integration.

mod assembly;
mod element;
mod field;
mod integrate;
pub mod quadrature;
mod space;
mod sparse;

pub use assembly::{
    apply_dirichlet, assemble_interface_flux, assemble_mass, assemble_nonlinear_load,
    assemble_weighted_mass, assemble_weighted_mass_with, assemble_weighted_stiffness,
    coupled_stiffness_load, MassWeight,
};
pub(crate) use assembly::{add_mass, add_stiffness, apply_dirichlet_mask, MassCoefficient};
pub use element::{basis_grads, basis_values, face_to_cell_bary, CellGeometry, Degree, LocalField};
pub use field::{interpolate_field, interpolate_nodal, DofMask, FeField};
pub use integrate::{integrate, integrate_grad_pair, integrate_pair, l2_project, l2_project_homogeneous};
pub use space::{DofEntity, FunctionSpace, Support};
pub use sparse::{SparseMatrix, SparsityPattern};

use crate::mesh::Point3;
use crate::solvers::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum FemError {
    #[error("no value supplied for boundary dof {dof}")]
    MissingBoundaryValue { dof: usize },
    #[error("point {0:?} lies outside the mesh")]
    PointOutsideMesh(Point3),
    #[error("point {0:?} lies outside the field's support")]
    PointOutsideSupport(Point3),
    #[error("non-finite value at dof {dof}")]
    NonFinite { dof: usize },
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error(transparent)]
    Solver(#[from] SolverError),
}
