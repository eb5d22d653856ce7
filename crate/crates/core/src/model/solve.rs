use super::{apply_qoi, ModelError, Nonlinearity, PbeProblem};
use crate::fem::{
    add_mass, add_stiffness, apply_dirichlet_mask, assemble_interface_flux, assemble_nonlinear_load,
    coupled_stiffness_load, Degree, FeField, FunctionSpace, MassCoefficient, MassWeight, SparseMatrix, Support,
};
use crate::mesh::Point3;
use crate::solvers::{cg_solve, newton_solve, NonlinearSystem, SolverConfig, SolverError};
use std::sync::Arc;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub newton_iterations: usize,
    /// Largest nodal magnitude of the regular component.
    pub max_regular_abs: f64,
    /// Whether the sinh/cosh clamp bound was reached by the converged iterate.
    pub clamp_active: bool,
}

/// Harmonic and regular components of a discrete solution.
#[derive(Clone, Debug)]
pub struct Solution {
    pub u_h: FeField,
    pub u_r: FeField,
    pub report: SolveReport,
}

fn solver_for(problem: &PbeProblem, degree: Degree) -> SolverConfig {
    match degree {
        Degree::P1 => problem.solver,
        Degree::P2 => problem.enriched_solver,
    }
}

fn boundary_data(
    space: &FunctionSpace,
    data: &dyn Fn(Point3) -> Result<f64, ModelError>,
) -> Result<Vec<f64>, ModelError> {
    let mut x = vec![0.0; space.num_dofs()];
    for d in 0..space.num_dofs() {
        if space.is_boundary(d) {
            let v = data(space.dof_point(d))?;
            if !v.is_finite() {
                return Err(ModelError::Fem(crate::fem::FemError::NonFinite { dof: d }));
            }
            x[d] = v;
        }
    }
    Ok(x)
}

/// Harmonic component on the primal space.
pub fn solve_harmonic(problem: &PbeProblem) -> Result<FeField, ModelError> {
    harmonic_impl(problem, Degree::P1, &|x| problem.singular_potential(x).map(|v| -v))
}

/// Harmonic extension of arbitrary Dirichlet data on the interface.
pub fn solve_harmonic_with_data(
    problem: &PbeProblem,
    degree: Degree,
    data: &dyn Fn(Point3) -> f64,
) -> Result<FeField, ModelError> {
    harmonic_impl(problem, degree, &|x| Ok(data(x)))
}

fn harmonic_impl(
    problem: &PbeProblem,
    degree: Degree,
    data: &dyn Fn(Point3) -> Result<f64, ModelError>,
) -> Result<FeField, ModelError> {
    let space = problem.space(degree, Support::MolecularOnly);
    let eps = problem.coefficients().eps_m;
    let mut a = SparseMatrix::zeros(space.pattern());
    add_stiffness(&mut a, &space, eps, eps);
    let x = boundary_data(&space, data)?;
    let mut b = vec![0.0; space.num_dofs()];
    apply_dirichlet_mask(&mut a, &mut b, space.boundary_mask(), &x);
    let (u, _) = cg_solve(&a, &b, &solver_for(problem, degree))?;
    check_maximum_principle(&space, &u);
    Ok(FeField::new(space, u)?)
}

fn check_maximum_principle(space: &FunctionSpace, u: &[f64]) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for d in 0..space.num_dofs() {
        if space.is_boundary(d) {
            lo = lo.min(u[d]);
            hi = hi.max(u[d]);
        }
    }
    // Iterative solves only resolve the potential to roughly the solver tolerance.
    let tol = 1e-6 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let (ilo, ihi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if ilo < lo - tol || ihi > hi + tol {
        log::warn!(
            "discrete maximum principle violated: interior range [{ilo:e}, {ihi:e}] exceeds boundary range [{lo:e}, {hi:e}]"
        );
    }
}

/// Operator of the regular-component equation on `space`: the weighted
/// stiffness plus the ionic mass term, weighted by `cosh(w)` when a weight
/// field is given.
pub fn regular_operator(
    problem: &PbeProblem,
    space: &Arc<FunctionSpace>,
    cosh_of: Option<&FeField>,
) -> Result<SparseMatrix, ModelError> {
    let c = problem.coefficients();
    let clamp = problem.newton.clamp_bound;
    let mut a = SparseMatrix::zeros(space.pattern());
    add_stiffness(&mut a, space, c.eps_m, c.eps_s);
    let map = move |v: f64| v.clamp(-clamp, clamp).cosh();
    let weight = cosh_of.map(|field| MassWeight { field, map: &map });
    add_mass(&mut a, space, MassCoefficient::SolventOnly(c.kappa_sq), weight.as_ref())?;
    Ok(a)
}

/// Right-hand side `-<eps_m du_s/dn, v>_Gamma - (eps_m grad U_h, grad v)_m`.
fn regular_rhs(problem: &PbeProblem, space: &Arc<FunctionSpace>, u_h: &FeField) -> Result<Vec<f64>, ModelError> {
    let c = problem.coefficients();
    let flux = assemble_interface_flux(space, &|x, n| problem.singular_flux(x, n).unwrap_or(f64::NAN));
    if flux.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::Solver(SolverError::NonFinite("interface flux".into())));
    }
    let coupling = coupled_stiffness_load(u_h, c.eps_m, c.eps_s, space)?;
    Ok(flux.iter().zip(&coupling).map(|(f, k)| -f - k).collect())
}

/// Regular component on the primal space given the harmonic component.
pub fn solve_regular(problem: &PbeProblem, u_h: &FeField) -> Result<(FeField, SolveReport), ModelError> {
    regular_impl(problem, Degree::P1, u_h)
}

fn regular_impl(
    problem: &PbeProblem,
    degree: Degree,
    u_h: &FeField,
) -> Result<(FeField, SolveReport), ModelError> {
    let space = problem.space(degree, Support::WholeDomain);
    let c = *problem.coefficients();
    let rhs = regular_rhs(problem, &space, u_h)?;
    let x = boundary_data(&space, &|p| problem.boundary_value_g(p))?;
    let mut a = regular_operator(problem, &space, None)?;
    let mut b = rhs.clone();
    apply_dirichlet_mask(&mut a, &mut b, space.boundary_mask(), &x);
    let linear = solver_for(problem, degree);
    let (mut u, _) = cg_solve(&a, &b, &linear)?;
    let mut report = SolveReport::default();
    if problem.nonlinearity() == Nonlinearity::Nonlinear && c.kappa_sq > 0.0 {
        let mut k = SparseMatrix::zeros(space.pattern());
        add_stiffness(&mut k, &space, c.eps_m, c.eps_s);
        let system = RegularSystem {
            space: space.clone(),
            stiffness: k,
            rhs,
            kappa_sq: c.kappa_sq,
            clamp: problem.newton.clamp_bound,
        };
        let (un, nr) = newton_solve(&system, u, &problem.newton, &linear)?;
        u = un;
        report.newton_iterations = nr.iterations;
    }
    report.max_regular_abs = u.iter().fold(0.0, |m, v| m.max(v.abs()));
    report.clamp_active = report.max_regular_abs >= problem.newton.clamp_bound;
    if report.clamp_active {
        log::warn!("regular component reached the clamp bound {}", problem.newton.clamp_bound);
    }
    Ok((FeField::new(space, u)?, report))
}

/// Discrete nonlinear regular-component system with Dirichlet dofs frozen.
pub struct RegularSystem {
    pub space: Arc<FunctionSpace>,
    /// Unconstrained weighted stiffness.
    pub stiffness: SparseMatrix,
    /// Unconstrained right-hand side.
    pub rhs: Vec<f64>,
    pub kappa_sq: f64,
    pub clamp: f64,
}

impl NonlinearSystem for RegularSystem {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        let field = FeField::new(self.space.clone(), u.to_vec()).map_err(|e| SolverError::Assembly(e.to_string()))?;
        let clamp = self.clamp;
        let n = assemble_nonlinear_load(&self.space, self.kappa_sq, &field, &|v| v.clamp(-clamp, clamp).sinh())
            .map_err(|e| SolverError::Assembly(e.to_string()))?;
        let mut r = self.stiffness.apply(u);
        for i in 0..r.len() {
            r[i] = if self.space.is_boundary(i) { 0.0 } else { r[i] + n[i] - self.rhs[i] };
        }
        Ok(r)
    }

    fn jacobian(&self, u: &[f64]) -> Result<SparseMatrix, SolverError> {
        let field = FeField::new(self.space.clone(), u.to_vec()).map_err(|e| SolverError::Assembly(e.to_string()))?;
        let clamp = self.clamp;
        let map = move |v: f64| v.clamp(-clamp, clamp).cosh();
        let mut j = self.stiffness.clone();
        add_mass(
            &mut j,
            &self.space,
            MassCoefficient::SolventOnly(self.kappa_sq),
            Some(&MassWeight { field: &field, map: &map }),
        )
        .map_err(|e| SolverError::Assembly(e.to_string()))?;
        let zeros = vec![0.0; u.len()];
        let mut dummy = vec![0.0; u.len()];
        apply_dirichlet_mask(&mut j, &mut dummy, self.space.boundary_mask(), &zeros);
        Ok(j)
    }
}

/// Primal solve on the P1 spaces.
pub fn solve(problem: &PbeProblem) -> Result<Solution, ModelError> {
    solve_in_degree(problem, Degree::P1)
}

/// Solve with both components in spaces of the given degree.
pub fn solve_in_degree(problem: &PbeProblem, degree: Degree) -> Result<Solution, ModelError> {
    let u_h = harmonic_impl(problem, degree, &|x| problem.singular_potential(x).map(|v| -v))?;
    let (u_r, report) = regular_impl(problem, degree, &u_h)?;
    Ok(Solution { u_h, u_r, report })
}

/// Goal functional `(psi, U_h + U_r)` over the molecular region.
pub fn qoi(problem: &PbeProblem, sol: &Solution) -> Result<f64, ModelError> {
    let nodes = problem.qoi_nodes()?;
    Ok(apply_qoi(nodes, &sol.u_h)? + apply_qoi(nodes, &sol.u_r)?)
}
