//! Preconditioned conjugate gradients on an assembled screened-Poisson system
//! and damped Newton on a small nonlinear one.

use std::collections::BTreeMap;
use std::error::Error;

use pbe_core::fem::{apply_dirichlet, assemble_mass, assemble_weighted_stiffness, Degree, FunctionSpace, SparseMatrix, Support};
use pbe_core::mesh::build_ball_mesh;
use pbe_core::solvers::{cg_solve, newton_solve, NewtonConfig, NonlinearSystem, Preconditioner, SolverConfig, SolverError};

/// `-u'' + sinh(u) = 1` on a uniform grid of the unit interval with zero ends.
struct SinhChain {
    n: usize,
}

impl NonlinearSystem for SinhChain {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        let h2 = ((self.n + 1) as f64).powi(-2);
        Ok((0..self.n)
            .map(|i| {
                let left = if i > 0 { u[i - 1] } else { 0.0 };
                let right = if i + 1 < self.n { u[i + 1] } else { 0.0 };
                (2.0 * u[i] - left - right) / h2 + u[i].sinh() - 1.0
            })
            .collect())
    }

    fn jacobian(&self, u: &[f64]) -> Result<SparseMatrix, SolverError> {
        let h2 = ((self.n + 1) as f64).powi(-2);
        let mut t = Vec::new();
        for i in 0..self.n {
            t.push((i, i, 2.0 / h2 + u[i].cosh()));
            if i > 0 {
                t.push((i, i - 1, -1.0 / h2));
            }
            if i + 1 < self.n {
                t.push((i, i + 1, -1.0 / h2));
            }
        }
        Ok(SparseMatrix::from_triplets(self.n, &t))
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mesh = std::sync::Arc::new(build_ball_mesh(2.0, 20.0, 2, 1)?);
    for degree in [Degree::P1, Degree::P2] {
        let space = FunctionSpace::new(mesh.clone(), degree, Support::WholeDomain);
        let mut a = assemble_weighted_stiffness(&space, 1.0, 78.0);
        a.add_scaled(&assemble_mass(&space), 0.9);
        let mut b = vec![0.0; space.num_dofs()];
        let values: BTreeMap<usize, f64> =
            space.boundary_dofs().into_iter().map(|d| (d, 1.0 / space.dof_point(d).norm())).collect();
        apply_dirichlet(&mut a, &mut b, &space.boundary_dofs(), &values)?;
        for pc in [Preconditioner::None, Preconditioner::Jacobi, Preconditioner::SymmetricGaussSeidel] {
            let cfg = SolverConfig { preconditioner: pc, ..Default::default() };
            let (_, report) = cg_solve(&a, &b, &cfg)?;
            println!("{degree:?} with {} dofs, {pc:?}: {} iterations", space.num_dofs(), report.iterations);
        }
    }

    let system = SinhChain { n: 99 };
    let (u, report) = newton_solve(&system, vec![0.0; 99], &NewtonConfig::default(), &SolverConfig::default())?;
    println!(
        "Newton: {} iterations, residual history {:?}, midpoint value {:.6}",
        report.iterations,
        report.residual_history.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>(),
        u[49]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
