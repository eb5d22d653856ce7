use std::collections::BTreeMap;
use std::sync::Arc;

use super::element::{basis_grads, basis_values, face_to_cell_bary, CellGeometry, Degree};
use super::field::FeField;
use super::quadrature::{tet_degree2, tet_degree4, tri_degree4};
use super::space::FunctionSpace;
use super::sparse::SparseMatrix;
use super::FemError;
use crate::mesh::{Point3, Region};

pub(crate) fn geometry(space: &FunctionSpace, cell: usize) -> CellGeometry {
    CellGeometry::new(space.mesh().cell_points(cell))
}

fn region_coeff(space: &FunctionSpace, cell: usize, molecular: f64, solvent: f64) -> f64 {
    match space.mesh().region(cell) {
        Region::Molecular => molecular,
        Region::Solvent => solvent,
    }
}

fn scatter(a: &mut SparseMatrix, dofs: &[usize], local: &[[f64; 10]; 10]) {
    let n = dofs.len();
    for i in 0..n {
        let (cols, vals) = a.row_mut(dofs[i]);
        for j in 0..n {
            let k = cols.binary_search(&(dofs[j] as u32)).expect("entry outside sparsity pattern");
            vals[k] += local[i][j];
        }
    }
}

/// Stiffness matrix of `eps grad u . grad v` with `eps` piecewise constant by region.
pub fn assemble_weighted_stiffness(space: &Arc<FunctionSpace>, eps_m: f64, eps_s: f64) -> SparseMatrix {
    let mut a = SparseMatrix::zeros(space.pattern());
    add_stiffness(&mut a, space, eps_m, eps_s);
    a
}

pub(crate) fn add_stiffness(a: &mut SparseMatrix, space: &FunctionSpace, eps_m: f64, eps_s: f64) {
    let deg = space.degree();
    let n = deg.dofs_per_cell();
    let rule = tet_degree2();
    let mut local = [[0.0; 10]; 10];
    let mut g = [Point3::ORIGIN; 10];
    for c in space.cells() {
        let geom = geometry(space, c);
        let eps = region_coeff(space, c, eps_m, eps_s);
        for row in local.iter_mut() {
            *row = [0.0; 10];
        }
        match deg {
            Degree::P1 => {
                for i in 0..4 {
                    for j in 0..4 {
                        local[i][j] = eps * geom.volume * geom.grad_lambda[i].dot(geom.grad_lambda[j]);
                    }
                }
            }
            Degree::P2 => {
                for (l, w) in rule.points.iter().zip(&rule.weights) {
                    basis_grads(deg, l, &geom.grad_lambda, &mut g);
                    let s = eps * w * 6.0 * geom.volume;
                    for i in 0..n {
                        for j in 0..n {
                            local[i][j] += s * g[i].dot(g[j]);
                        }
                    }
                }
            }
        }
        scatter(a, space.cell_dofs(c), &local);
    }
}

/// Cell coefficient of a mass-type form.
#[derive(Clone, Copy)]
pub(crate) enum MassCoefficient {
    /// `c` on every cell of the support.
    Uniform(f64),
    /// `c` on solvent cells, zero on molecular cells.
    SolventOnly(f64),
}

/// A field composed with a scalar map, evaluated at quadrature points.
pub struct MassWeight<'a> {
    pub field: &'a FeField,
    pub map: &'a dyn Fn(f64) -> f64,
}

/// Mass matrix of `kappa_sq * w * u * v` over solvent cells; `w` is the
/// interpolated weight field, or one when absent.
pub fn assemble_weighted_mass(
    space: &Arc<FunctionSpace>,
    kappa_sq: f64,
    weight: Option<&FeField>,
) -> Result<SparseMatrix, FemError> {
    let id = |x: f64| x;
    let w = weight.map(|field| MassWeight { field, map: &id });
    assemble_weighted_mass_with(space, kappa_sq, w)
}

pub fn assemble_weighted_mass_with(
    space: &Arc<FunctionSpace>,
    kappa_sq: f64,
    weight: Option<MassWeight<'_>>,
) -> Result<SparseMatrix, FemError> {
    let mut a = SparseMatrix::zeros(space.pattern());
    add_mass(&mut a, space, MassCoefficient::SolventOnly(kappa_sq), weight.as_ref())?;
    Ok(a)
}

/// Unit-coefficient mass matrix over the support.
pub fn assemble_mass(space: &Arc<FunctionSpace>) -> SparseMatrix {
    let mut a = SparseMatrix::zeros(space.pattern());
    add_mass(&mut a, space, MassCoefficient::Uniform(1.0), None).expect("unweighted mass");
    a
}

pub(crate) fn add_mass(
    a: &mut SparseMatrix,
    space: &FunctionSpace,
    coeff: MassCoefficient,
    weight: Option<&MassWeight<'_>>,
) -> Result<(), FemError> {
    if let Some(w) = weight {
        if !w.field.space().same_mesh(space) {
            return Err(FemError::MeshMismatch);
        }
    }
    let deg = space.degree();
    let n = deg.dofs_per_cell();
    let rule = tet_degree4();
    let mut local = [[0.0; 10]; 10];
    let mut phi = [0.0; 10];
    for c in space.cells() {
        let k = match coeff {
            MassCoefficient::Uniform(v) => v,
            MassCoefficient::SolventOnly(v) => region_coeff(space, c, 0.0, v),
        };
        if k == 0.0 {
            continue;
        }
        let geom = geometry(space, c);
        for row in local.iter_mut() {
            *row = [0.0; 10];
        }
        match (deg, weight) {
            (Degree::P1, None) => {
                let s = k * geom.volume / 20.0;
                for i in 0..4 {
                    for j in 0..4 {
                        local[i][j] = if i == j { 2.0 * s } else { s };
                    }
                }
            }
            _ => {
                let wl = match weight {
                    Some(w) => Some(w.field.local(c).ok_or_else(|| {
                        FemError::SupportMismatch(format!("weight field undefined on cell {c}"))
                    })?),
                    None => None,
                };
                for (l, qw) in rule.points.iter().zip(&rule.weights) {
                    basis_values(deg, l, &mut phi);
                    let wv = match (weight, &wl) {
                        (Some(w), Some(loc)) => (w.map)(loc.value(l)),
                        _ => 1.0,
                    };
                    let s = k * wv * qw * 6.0 * geom.volume;
                    for i in 0..n {
                        for j in 0..n {
                            local[i][j] += s * phi[i] * phi[j];
                        }
                    }
                }
            }
        }
        scatter(a, space.cell_dofs(c), &local);
    }
    Ok(())
}

/// Load vector `int kappa_sq * map(u) * v` over solvent cells.
pub fn assemble_nonlinear_load(
    space: &Arc<FunctionSpace>,
    kappa_sq: f64,
    u: &FeField,
    map: &dyn Fn(f64) -> f64,
) -> Result<Vec<f64>, FemError> {
    if !u.space().same_mesh(space) {
        return Err(FemError::MeshMismatch);
    }
    let deg = space.degree();
    let n = deg.dofs_per_cell();
    let rule = tet_degree4();
    let mut b = vec![0.0; space.num_dofs()];
    let mut phi = [0.0; 10];
    for c in space.cells() {
        if space.mesh().region(c) != Region::Solvent || kappa_sq == 0.0 {
            continue;
        }
        let ul = u
            .local(c)
            .ok_or_else(|| FemError::SupportMismatch(format!("field undefined on cell {c}")))?;
        let geom = geometry(space, c);
        let dofs = space.cell_dofs(c);
        for (l, qw) in rule.points.iter().zip(&rule.weights) {
            basis_values(deg, l, &mut phi);
            let s = kappa_sq * map(ul.value(l)) * qw * 6.0 * geom.volume;
            for i in 0..n {
                b[dofs[i]] += s * phi[i];
            }
        }
    }
    Ok(b)
}

/// Vector `int eps grad f . grad v` over the cells shared by the field and
/// the target space.
pub fn coupled_stiffness_load(
    f: &FeField,
    eps_m: f64,
    eps_s: f64,
    target: &Arc<FunctionSpace>,
) -> Result<Vec<f64>, FemError> {
    if !f.space().same_mesh(target) {
        return Err(FemError::MeshMismatch);
    }
    let deg = target.degree();
    let n = deg.dofs_per_cell();
    let rule = tet_degree2();
    let mut b = vec![0.0; target.num_dofs()];
    let mut g = [Point3::ORIGIN; 10];
    for c in target.cells() {
        let Some(fl) = f.local(c) else { continue };
        let geom = geometry(target, c);
        let eps = region_coeff(target, c, eps_m, eps_s);
        let dofs = target.cell_dofs(c);
        for (l, qw) in rule.points.iter().zip(&rule.weights) {
            let gf = fl.gradient(l, &geom);
            basis_grads(deg, l, &geom.grad_lambda, &mut g);
            let s = eps * qw * 6.0 * geom.volume;
            for i in 0..n {
                b[dofs[i]] += s * gf.dot(g[i]);
            }
        }
    }
    Ok(b)
}

/// Vector `int_Gamma flux(x, n) v ds` with `n` the outward normal of the
/// molecular region.
pub fn assemble_interface_flux(
    space: &Arc<FunctionSpace>,
    flux: &dyn Fn(Point3, Point3) -> f64,
) -> Vec<f64> {
    let deg = space.degree();
    let n = deg.dofs_per_cell();
    let rule = tri_degree4();
    let mesh = space.mesh();
    let mut b = vec![0.0; space.num_dofs()];
    let mut phi = [0.0; 10];
    for f in mesh.interface_facets() {
        if !space.contains_cell(f.cell) {
            continue;
        }
        let (normal, area) = mesh.facet_normal_area(*f);
        let geom = geometry(space, f.cell);
        let dofs = space.cell_dofs(f.cell);
        for (t, qw) in rule.points.iter().zip(&rule.weights) {
            let l = face_to_cell_bary(f.face as usize, t);
            let x = geom.map(&l);
            basis_values(deg, &l, &mut phi);
            let s = flux(x, normal) * qw * 2.0 * area;
            for i in 0..n {
                b[dofs[i]] += s * phi[i];
            }
        }
    }
    b
}

/// Symmetric elimination of Dirichlet dofs: constrained rows and columns
/// become identity, the known column contributions move to the right side.
pub fn apply_dirichlet(
    a: &mut SparseMatrix,
    b: &mut [f64],
    boundary_dofs: &[usize],
    values: &BTreeMap<usize, f64>,
) -> Result<(), FemError> {
    let n = a.nrows();
    let mut mask = vec![false; n];
    let mut x = vec![0.0; n];
    for &d in boundary_dofs {
        let v = *values.get(&d).ok_or(FemError::MissingBoundaryValue { dof: d })?;
        mask[d] = true;
        x[d] = v;
    }
    apply_dirichlet_mask(a, b, &mask, &x);
    Ok(())
}

pub(crate) fn apply_dirichlet_mask(a: &mut SparseMatrix, b: &mut [f64], mask: &[bool], x: &[f64]) {
    for i in 0..a.nrows() {
        let (cols, vals) = a.row_mut(i);
        if mask[i] {
            for (c, v) in cols.iter().zip(vals.iter_mut()) {
                *v = if *c as usize == i { 1.0 } else { 0.0 };
            }
            b[i] = x[i];
        } else {
            for (c, v) in cols.iter().zip(vals.iter_mut()) {
                let j = *c as usize;
                if mask[j] {
                    b[i] -= *v * x[j];
                    *v = 0.0;
                }
            }
        }
    }
}
