//! The nonlinear and linearized models on one mesh as the charge grows,
//! with Newton iteration counts.

use std::error::Error;

use pbe_core::mesh::build_ball_mesh;
use pbe_core::model::{qoi, solve, ChargeSystem, Coefficients, Nonlinearity, PbeProblem};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mesh = std::sync::Arc::new(build_ball_mesh(2.0, 20.0, 2, 1)?);
    let coeffs = Coefficients { charge_scale: 560.2, ..Default::default() };
    for q in [0.1, 1.0, 3.0, 10.0] {
        let goal = |nl| -> Result<(f64, usize), Box<dyn Error>> {
            let p = PbeProblem::new(mesh.clone(), coeffs, ChargeSystem::single(q), nl)?;
            let sol = solve(&p)?;
            Ok((qoi(&p, &sol)?, sol.report.newton_iterations))
        };
        let (lin, _) = goal(Nonlinearity::Linearized)?;
        let (non, its) = goal(Nonlinearity::Nonlinear)?;
        println!(
            "charge {q:>5}: linearized {lin:>12.4} nonlinear {non:>12.4} ({its} Newton steps), relative gap {:.2e}",
            ((non - lin) / lin).abs()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
