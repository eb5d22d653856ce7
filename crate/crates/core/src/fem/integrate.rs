use std::sync::Arc;

use super::assembly::{add_mass, apply_dirichlet_mask, geometry, MassCoefficient};
use super::element::basis_values;
use super::field::FeField;
use super::quadrature::{tet_degree2, tet_degree4};
use super::space::FunctionSpace;
use super::sparse::SparseMatrix;
use super::FemError;
use crate::mesh::Region;
use crate::solvers::{cg_solve, Preconditioner, SolverConfig};

fn region_ok(space: &FunctionSpace, cell: usize, region: Option<Region>) -> bool {
    region.is_none_or(|r| space.mesh().region(cell) == r)
}

/// `int f g` over cells where both fields are defined, optionally restricted to a region.
pub fn integrate_pair(f: &FeField, g: &FeField, region: Option<Region>) -> Result<f64, FemError> {
    if !f.space().same_mesh(g.space()) {
        return Err(FemError::MeshMismatch);
    }
    let rule = tet_degree4();
    let mut total = 0.0;
    for c in f.space().cells() {
        if !region_ok(f.space(), c, region) {
            continue;
        }
        let (Some(fl), Some(gl)) = (f.local(c), g.local(c)) else { continue };
        let geom = geometry(f.space(), c);
        let mut s = 0.0;
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            s += w * fl.value(l) * gl.value(l);
        }
        total += s * 6.0 * geom.volume;
    }
    Ok(total)
}

/// `int f` over the support, optionally restricted to a region.
pub fn integrate(f: &FeField, region: Option<Region>) -> f64 {
    let rule = tet_degree4();
    let mut total = 0.0;
    for c in f.space().cells() {
        if !region_ok(f.space(), c, region) {
            continue;
        }
        let fl = f.local(c).expect("support cell");
        let geom = geometry(f.space(), c);
        let s: f64 = rule.points.iter().zip(&rule.weights).map(|(l, w)| w * fl.value(l)).sum();
        total += s * 6.0 * geom.volume;
    }
    total
}

/// `int eps grad f . grad g` over cells where both fields are defined.
pub fn integrate_grad_pair(f: &FeField, g: &FeField, eps_m: f64, eps_s: f64) -> Result<f64, FemError> {
    if !f.space().same_mesh(g.space()) {
        return Err(FemError::MeshMismatch);
    }
    let rule = tet_degree2();
    let mut total = 0.0;
    for c in f.space().cells() {
        let (Some(fl), Some(gl)) = (f.local(c), g.local(c)) else { continue };
        let geom = geometry(f.space(), c);
        let eps = match f.space().mesh().region(c) {
            Region::Molecular => eps_m,
            Region::Solvent => eps_s,
        };
        let mut s = 0.0;
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            s += w * fl.gradient(l, &geom).dot(gl.gradient(l, &geom));
        }
        total += eps * s * 6.0 * geom.volume;
    }
    Ok(total)
}

fn projection_rhs(f: &FeField, target: &Arc<FunctionSpace>) -> Result<Vec<f64>, FemError> {
    if !f.space().same_mesh(target) {
        return Err(FemError::MeshMismatch);
    }
    let rule = tet_degree4();
    let deg = target.degree();
    let n = deg.dofs_per_cell();
    let mut b = vec![0.0; target.num_dofs()];
    let mut phi = [0.0; 10];
    for c in target.cells() {
        let fl = f
            .local(c)
            .ok_or_else(|| FemError::SupportMismatch(format!("projected field undefined on cell {c}")))?;
        let geom = geometry(target, c);
        let dofs = target.cell_dofs(c);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            basis_values(deg, l, &mut phi);
            let s = w * 6.0 * geom.volume * fl.value(l);
            for i in 0..n {
                b[dofs[i]] += s * phi[i];
            }
        }
    }
    Ok(b)
}

fn projection_solver() -> SolverConfig {
    SolverConfig {
        rel_tolerance: 1e-13,
        abs_tolerance: 1e-300,
        max_iterations: None,
        preconditioner: Preconditioner::Jacobi,
    }
}

/// L2 projection onto the whole target space.
pub fn l2_project(f: &FeField, target: &Arc<FunctionSpace>) -> Result<FeField, FemError> {
    let b = projection_rhs(f, target)?;
    let mut m = SparseMatrix::zeros(target.pattern());
    add_mass(&mut m, target, MassCoefficient::Uniform(1.0), None)?;
    let (x, _) = cg_solve(&m, &b, &projection_solver())?;
    FeField::new(target.clone(), x)
}

/// L2 projection onto the subspace with vanishing boundary dofs.
pub fn l2_project_homogeneous(f: &FeField, target: &Arc<FunctionSpace>) -> Result<FeField, FemError> {
    let mut b = projection_rhs(f, target)?;
    let mut m = SparseMatrix::zeros(target.pattern());
    add_mass(&mut m, target, MassCoefficient::Uniform(1.0), None)?;
    let zeros = vec![0.0; target.num_dofs()];
    apply_dirichlet_mask(&mut m, &mut b, target.boundary_mask(), &zeros);
    let (x, _) = cg_solve(&m, &b, &projection_solver())?;
    FeField::new(target.clone(), x)
}
