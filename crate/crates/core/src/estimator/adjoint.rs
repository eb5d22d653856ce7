use std::sync::Arc;

use super::EstimatorError;
use crate::fem::{
    add_stiffness, apply_dirichlet_mask, basis_values, coupled_stiffness_load, interpolate_nodal, Degree, DofMask,
    FeField, FunctionSpace, SparseMatrix, Support,
};
use crate::model::{regular_operator, ModelError, Nonlinearity, PbeProblem};
use crate::solvers::cg_solve;

/// Adjoint components in the enriched spaces; both vanish on their boundary dofs.
#[derive(Clone, Debug)]
pub struct AdjointSolution {
    pub phi_h: FeField,
    pub phi_r: FeField,
}

/// Load vector `(psi, v)` over the basis of `space`, computed with the goal
/// functional's quadrature nodes.
pub fn qoi_load(problem: &PbeProblem, space: &FunctionSpace) -> Result<Vec<f64>, EstimatorError> {
    let deg = space.degree();
    let n = deg.dofs_per_cell();
    let mut b = vec![0.0; space.num_dofs()];
    let mut phi = [0.0; 10];
    for node in problem.qoi_nodes()? {
        if !space.contains_cell(node.cell) {
            return Err(ModelError::SupportCrossesInterface { charge: node.charge }.into());
        }
        basis_values(deg, &node.bary, &mut phi);
        let dofs = space.cell_dofs(node.cell);
        for k in 0..n {
            b[dofs[k]] += node.weight * phi[k];
        }
    }
    Ok(b)
}

/// Matrix of the regular-component adjoint on `space`. For nonlinear
/// problems the ionic term is weighted by `cosh(U_r)`, the linearisation
/// about the discrete solution.
pub fn adjoint_regular_operator(
    problem: &PbeProblem,
    space: &Arc<FunctionSpace>,
    u_r: Option<&FeField>,
) -> Result<SparseMatrix, EstimatorError> {
    let weight = match problem.nonlinearity() {
        Nonlinearity::Linearized => None,
        Nonlinearity::Nonlinear => Some(u_r.ok_or(EstimatorError::MissingPrimal)?),
    };
    Ok(regular_operator(problem, space, weight)?)
}

/// Solves the reversed one-way coupling in the degree-2 spaces: first the
/// regular adjoint over the whole domain, then the harmonic adjoint driven
/// by the goal weight minus the coupling to the regular adjoint.
pub fn solve_adjoint(problem: &PbeProblem, u_r: Option<&FeField>) -> Result<AdjointSolution, EstimatorError> {
    let c = *problem.coefficients();
    let cfg = problem.enriched_solver;

    let space_r = problem.space(Degree::P2, Support::WholeDomain);
    let mut a = adjoint_regular_operator(problem, &space_r, u_r)?;
    let mut b = qoi_load(problem, &space_r)?;
    let zeros = vec![0.0; space_r.num_dofs()];
    apply_dirichlet_mask(&mut a, &mut b, space_r.boundary_mask(), &zeros);
    let (x, _) = cg_solve(&a, &b, &cfg)?;
    let phi_r = FeField::new(space_r, x)?;

    let space_h = problem.space(Degree::P2, Support::MolecularOnly);
    let mut k = SparseMatrix::zeros(space_h.pattern());
    add_stiffness(&mut k, &space_h, c.eps_m, c.eps_m);
    let load = qoi_load(problem, &space_h)?;
    let coupling = coupled_stiffness_load(&phi_r, c.eps_m, c.eps_s, &space_h)?;
    let mut b: Vec<f64> = load.iter().zip(&coupling).map(|(l, k)| l - k).collect();
    let zeros = vec![0.0; space_h.num_dofs()];
    apply_dirichlet_mask(&mut k, &mut b, space_h.boundary_mask(), &zeros);
    let (x, _) = cg_solve(&k, &b, &cfg)?;
    let phi_h = FeField::new(space_h, x)?;
    Ok(AdjointSolution { phi_h, phi_r })
}

/// Boundary-only interpolants of the Dirichlet data: `g` on the outer
/// boundary and `-u_s` on the interface, in the primal and enriched spaces.
#[derive(Clone, Debug)]
pub struct LiftingPair {
    pub primal_r: FeField,
    pub primal_h: FeField,
    pub enriched_r: FeField,
    pub enriched_h: FeField,
}

pub fn build_liftings(problem: &PbeProblem) -> Result<LiftingPair, EstimatorError> {
    let g = |x| problem.boundary_value_g(x).unwrap_or(f64::NAN);
    let h = |x| problem.singular_potential(x).map_or(f64::NAN, |v| -v);
    let lift = |deg, support, f: &dyn Fn(_) -> f64| {
        interpolate_nodal(f, &problem.space(deg, support), DofMask::BoundaryOnly)
    };
    Ok(LiftingPair {
        primal_r: lift(Degree::P1, Support::WholeDomain, &g)?,
        primal_h: lift(Degree::P1, Support::MolecularOnly, &h)?,
        enriched_r: lift(Degree::P2, Support::WholeDomain, &g)?,
        enriched_h: lift(Degree::P2, Support::MolecularOnly, &h)?,
    })
}
