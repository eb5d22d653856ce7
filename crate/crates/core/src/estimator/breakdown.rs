use std::sync::Arc;

use super::adjoint::{build_liftings, solve_adjoint, AdjointSolution, LiftingPair};
use super::{EstimatorError, Source};
use crate::fem::quadrature::{tet_degree2, tet_degree4, tri_degree4};
use crate::fem::{face_to_cell_bary, l2_project_homogeneous, CellGeometry, Degree, FeField, LocalField};
use crate::mesh::EDGE_VERTICES;
use crate::mesh::Region;
use crate::model::{Nonlinearity, PbeProblem, Solution};

/// Weak form used for the coupling term of the regular-component residual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EstimatorMode {
    #[default]
    Standard,
    /// Writes the coupling as an interface flux of the harmonic component
    /// plus a separate remainder term.
    AlternateWeakForm,
}

/// Split of the estimated goal error.
#[derive(Clone, Debug)]
pub struct ErrorBreakdown {
    pub e_r: f64,
    pub e_m: f64,
    pub e_gamma: f64,
    pub e_domega: f64,
    pub e_neg: f64,
    /// Remainder of the alternate weak form.
    pub e_har: Option<f64>,
    pub total: f64,
    /// Signed per-cell contributions indexed by [`Source::index`]; interface
    /// integrals are attributed to the molecular cell owning the facet.
    pub per_cell: [Vec<f64>; 4],
    /// Signed per-cell contributions with the adjoint weights replaced by
    /// their distance to the primal space.
    pub classical_per_cell: Vec<f64>,
}

impl ErrorBreakdown {
    pub fn component(&self, s: Source) -> f64 {
        self.components()[s.index()]
    }

    /// `[E_r, E_m, E_Gamma, E_dOmega]`.
    pub fn components(&self) -> [f64; 4] {
        [self.e_r, self.e_m, self.e_gamma, self.e_domega]
    }

    pub fn cells(&self, s: Source) -> &[f64] {
        &self.per_cell[s.index()]
    }
}

/// Per-cell pieces of the primal residual tested with `(v_h, v_r)`.
struct ResidualParts {
    /// `<eps_m du_s/dn, v_r>` on interface facets.
    singular_flux: Vec<f64>,
    /// `(eps grad U_r, grad v_r) + (kappa_sq N(U_r), v_r)`.
    regular: Vec<f64>,
    /// `(eps_m grad U_h, grad v_r)` on molecular cells.
    coupling: Vec<f64>,
    /// `<eps_m dU_h/dn, v_r>` on interface facets.
    harmonic_flux: Vec<f64>,
    /// `(eps_m grad U_h, grad v_h)`.
    harmonic: Vec<f64>,
}

fn check_mesh(problem: &PbeProblem, fields: &[&FeField]) -> Result<(), EstimatorError> {
    if fields.iter().all(|f| Arc::ptr_eq(f.space().mesh(), problem.mesh())) {
        Ok(())
    } else {
        Err(EstimatorError::MeshMismatch)
    }
}

fn ionic(problem: &PbeProblem) -> impl Fn(f64) -> (f64, f64) {
    let clamp = problem.newton.clamp_bound;
    let nonlinear = problem.nonlinearity() == Nonlinearity::Nonlinear;
    move |u: f64| {
        if nonlinear {
            let v = u.clamp(-clamp, clamp);
            (v.sinh(), v.cosh())
        } else {
            (u, 1.0)
        }
    }
}

fn residual_parts(
    problem: &PbeProblem,
    sol: &Solution,
    v_h: &FeField,
    v_r: &FeField,
) -> Result<ResidualParts, EstimatorError> {
    check_mesh(problem, &[&sol.u_h, &sol.u_r, v_h, v_r])?;
    let mesh = problem.mesh();
    let c = *problem.coefficients();
    let n = mesh.num_cells();
    let mut p = ResidualParts {
        singular_flux: vec![0.0; n],
        regular: vec![0.0; n],
        coupling: vec![0.0; n],
        harmonic_flux: vec![0.0; n],
        harmonic: vec![0.0; n],
    };
    let stiff_rule = tet_degree2();
    let mass_rule = tet_degree4();
    let nl = ionic(problem);

    for cell in 0..n {
        let geom = CellGeometry::new(mesh.cell_points(cell));
        let jac = 6.0 * geom.volume;
        let region = mesh.region(cell);
        let eps = c.eps(region);
        let ur = sol.u_r.local(cell).expect("regular component covers the mesh");
        let vr = v_r.local(cell).expect("regular test field covers the mesh");
        let mut s = 0.0;
        for (l, w) in stiff_rule.points.iter().zip(&stiff_rule.weights) {
            s += w * ur.gradient(l, &geom).dot(vr.gradient(l, &geom));
        }
        let mut reg = eps * s * jac;
        if region == Region::Solvent && c.kappa_sq > 0.0 {
            let mut m = 0.0;
            for (l, w) in mass_rule.points.iter().zip(&mass_rule.weights) {
                m += w * nl(ur.value(l)).0 * vr.value(l);
            }
            reg += c.kappa_sq * m * jac;
        }
        p.regular[cell] = reg;
        if region == Region::Molecular {
            let uh = sol.u_h.local(cell).expect("harmonic component covers the molecule");
            let vh = v_h.local(cell).expect("harmonic test field covers the molecule");
            let (mut cp, mut hm) = (0.0, 0.0);
            for (l, w) in stiff_rule.points.iter().zip(&stiff_rule.weights) {
                let g = uh.gradient(l, &geom);
                cp += w * g.dot(vr.gradient(l, &geom));
                hm += w * g.dot(vh.gradient(l, &geom));
            }
            p.coupling[cell] = c.eps_m * cp * jac;
            p.harmonic[cell] = c.eps_m * hm * jac;
        }
    }

    let tri = tri_degree4();
    for f in mesh.interface_facets() {
        let (normal, area) = mesh.facet_normal_area(*f);
        let geom = CellGeometry::new(mesh.cell_points(f.cell));
        let vr = v_r.local(f.cell).expect("regular test field covers the mesh");
        let uh = sol.u_h.local(f.cell).expect("interface facets are owned by molecular cells");
        let (mut sf, mut hf) = (0.0, 0.0);
        for (t, w) in tri.points.iter().zip(&tri.weights) {
            let l = face_to_cell_bary(f.face as usize, t);
            let x = geom.map(&l);
            let v = vr.value(&l);
            sf += w * problem.singular_flux(x, normal)? * v;
            hf += w * c.eps_m * uh.gradient(&l, &geom).dot(normal) * v;
        }
        p.singular_flux[f.cell] += sf * 2.0 * area;
        p.harmonic_flux[f.cell] += hf * 2.0 * area;
    }
    Ok(p)
}

/// Primal residual `R_r(v_r) + R_m(v_h)` of the discrete equations. It
/// vanishes up to solver tolerance for test fields in the primal spaces with
/// zero boundary values.
pub fn galerkin_residual(
    problem: &PbeProblem,
    sol: &Solution,
    v_h: &FeField,
    v_r: &FeField,
) -> Result<f64, EstimatorError> {
    let p = residual_parts(problem, sol, v_h, v_r)?;
    Ok((0..p.regular.len())
        .map(|c| -p.singular_flux[c] - p.regular[c] - p.coupling[c] - p.harmonic[c])
        .sum())
}

/// Per-cell boundary-data terms: interface, outer boundary and the lifting mismatch.
struct DataParts {
    interface: Vec<f64>,
    outer: Vec<f64>,
    negligible: Vec<f64>,
}

fn data_parts(
    problem: &PbeProblem,
    sol: &Solution,
    adj: &AdjointSolution,
    lift: &LiftingPair,
) -> Result<DataParts, EstimatorError> {
    check_mesh(
        problem,
        &[&adj.phi_h, &adj.phi_r, &lift.primal_h, &lift.primal_r, &lift.enriched_h, &lift.enriched_r],
    )?;
    let mesh = problem.mesh();
    let c = *problem.coefficients();
    let n = mesh.num_cells();
    let mut d = DataParts { interface: vec![0.0; n], outer: vec![0.0; n], negligible: vec![0.0; n] };
    let stiff_rule = tet_degree2();
    let mass_rule = tet_degree4();
    let nl = ionic(problem);
    for cell in 0..n {
        let geom = CellGeometry::new(mesh.cell_points(cell));
        let jac = 6.0 * geom.volume;
        let region = mesh.region(cell);
        if let Some(gap) = lifting_gap(&lift.primal_h, &lift.enriched_h, cell) {
            let ph = adj.phi_h.local(cell).expect("harmonic adjoint covers the molecule");
            let pr = adj.phi_r.local(cell).expect("regular adjoint covers the mesh");
            let mut s = 0.0;
            for (l, w) in stiff_rule.points.iter().zip(&stiff_rule.weights) {
                s += w * (ph.gradient(l, &geom) + pr.gradient(l, &geom)).dot(gap.gradient(l, &geom));
            }
            d.interface[cell] = c.eps_m * s * jac;
        }
        if let Some(gap) = lifting_gap(&lift.primal_r, &lift.enriched_r, cell) {
            let pr = adj.phi_r.local(cell).expect("regular adjoint covers the mesh");
            let mut s = 0.0;
            for (l, w) in stiff_rule.points.iter().zip(&stiff_rule.weights) {
                s += w * pr.gradient(l, &geom).dot(gap.gradient(l, &geom));
            }
            let mut total = c.eps(region) * s * jac;
            if region == Region::Solvent && c.kappa_sq > 0.0 {
                let ur = sol.u_r.local(cell).expect("regular component covers the mesh");
                let mut m = 0.0;
                for (l, w) in mass_rule.points.iter().zip(&mass_rule.weights) {
                    m += w * nl(ur.value(l)).1 * pr.value(l) * gap.value(l);
                }
                total += c.kappa_sq * m * jac;
            }
            d.outer[cell] = total;
        }
    }

    for node in problem.qoi_nodes()? {
        let eval = |f: &FeField| f.value_in_cell(node.cell, &node.bary).unwrap_or(0.0);
        let gap = eval(&lift.enriched_h) - eval(&lift.primal_h) + eval(&lift.enriched_r) - eval(&lift.primal_r);
        d.negligible[node.cell] += node.weight * gap;
    }
    Ok(d)
}

/// Degree-2 coefficients of `primal - enriched` on `cell`, or `None` where
/// the two liftings coincide.
fn lifting_gap(primal: &FeField, enriched: &FeField, cell: usize) -> Option<LocalField> {
    let (p, e) = (primal.local(cell)?, enriched.local(cell)?);
    let mut coeffs = [0.0; 10];
    for k in 0..4 {
        coeffs[k] = p.coeffs[k] - e.coeffs[k];
    }
    for (k, [i, j]) in EDGE_VERTICES.iter().enumerate() {
        coeffs[4 + k] = 0.5 * (p.coeffs[*i] + p.coeffs[*j]) - e.coeffs[4 + k];
    }
    coeffs.iter().any(|v| *v != 0.0).then_some(LocalField { degree: Degree::P2, coeffs })
}

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

/// Error components for a discrete solution, its enriched adjoint and the
/// boundary liftings.
pub fn compute_error_breakdown(
    problem: &PbeProblem,
    sol: &Solution,
    adj: &AdjointSolution,
    lift: &LiftingPair,
    mode: EstimatorMode,
) -> Result<ErrorBreakdown, EstimatorError> {
    let parts = residual_parts(problem, sol, &adj.phi_h, &adj.phi_r)?;
    let data = data_parts(problem, sol, adj, lift)?;
    let n = parts.regular.len();

    let regular: Vec<f64> = (0..n)
        .map(|c| {
            let coupling = match mode {
                EstimatorMode::Standard => parts.coupling[c],
                EstimatorMode::AlternateWeakForm => parts.harmonic_flux[c],
            };
            -parts.singular_flux[c] - parts.regular[c] - coupling
        })
        .collect();
    let harmonic: Vec<f64> = parts.harmonic.iter().map(|v| -v).collect();
    let e_har = match mode {
        EstimatorMode::Standard => None,
        EstimatorMode::AlternateWeakForm => Some((0..n).map(|c| parts.harmonic_flux[c] - parts.coupling[c]).sum()),
    };

    let classical = classical_cells(problem, sol, adj, &data)?;

    let (e_r, e_m, e_gamma, e_domega, e_neg) =
        (sum(&regular), sum(&harmonic), sum(&data.interface), sum(&data.outer), sum(&data.negligible));
    let total = e_r + e_m + e_gamma + e_domega + e_neg + e_har.unwrap_or(0.0);
    Ok(ErrorBreakdown {
        e_r,
        e_m,
        e_gamma,
        e_domega,
        e_neg,
        e_har,
        total,
        per_cell: [regular, harmonic, data.interface, data.outer],
        classical_per_cell: classical,
    })
}

/// Residual contributions with weights `phi - pi phi`, `pi` the L2 projection
/// onto the primal spaces with zero boundary values, plus the data terms.
fn classical_cells(
    problem: &PbeProblem,
    sol: &Solution,
    adj: &AdjointSolution,
    data: &DataParts,
) -> Result<Vec<f64>, EstimatorError> {
    let mut wh = adj.phi_h.clone();
    let mut wr = adj.phi_r.clone();
    let ph = l2_project_homogeneous(&adj.phi_h, sol.u_h.space())?;
    let pr = l2_project_homogeneous(&adj.phi_r, sol.u_r.space())?;
    subtract_interpolated(&mut wh, &ph);
    subtract_interpolated(&mut wr, &pr);
    let p = residual_parts(problem, sol, &wh, &wr)?;
    Ok((0..p.regular.len())
        .map(|c| {
            -p.singular_flux[c] - p.regular[c] - p.coupling[c] - p.harmonic[c]
                + data.interface[c]
                + data.outer[c]
                + data.negligible[c]
        })
        .collect())
}

/// `target -= f` with `f` a degree-1 field embedded in the degree-2 target;
/// edge dofs take the mean of their endpoint values.
fn subtract_interpolated(target: &mut FeField, f: &FeField) {
    let embedded = crate::fem::interpolate_field(f, target.space()).expect("same mesh and support");
    target.add_scaled(&embedded, -1.0).expect("same space");
}

/// Absolute classical dual-weighted-residual indicators.
pub fn classical_indicators(b: &ErrorBreakdown) -> Vec<f64> {
    b.classical_per_cell.iter().map(|v| v.abs()).collect()
}

/// Absolute per-cell contributions of one source.
pub fn source_indicators(b: &ErrorBreakdown, source: Source) -> Vec<f64> {
    b.cells(source).iter().map(|v| v.abs()).collect()
}

/// Adjoint solve, liftings and breakdown for a converged primal solution.
pub fn estimate(
    problem: &PbeProblem,
    sol: &Solution,
    mode: EstimatorMode,
) -> Result<(AdjointSolution, ErrorBreakdown), EstimatorError> {
    let adj = solve_adjoint(problem, Some(&sol.u_r))?;
    let lift = build_liftings(problem)?;
    let b = compute_error_breakdown(problem, sol, &adj, &lift, mode)?;
    Ok((adj, b))
}
