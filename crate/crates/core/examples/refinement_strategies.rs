//! The four refinement strategies run on the same Born problem, printed as
//! aligned tables with effectivities against a quadratic reference.

use std::error::Error;

use pbe_core::app::{emit_table, TableFormat};
use pbe_core::fem::Degree;
use pbe_core::mesh::{build_ball_mesh, refine_uniform};
use pbe_core::model::{qoi, solve_in_degree, ChargeSystem, Coefficients, Nonlinearity, PbeProblem};
use pbe_core::refine::{run_refinement_loop, StrategyConfig, StrategyKind};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mesh = build_ball_mesh(2.0, 20.0, 2, 1)?;
    let problem = PbeProblem::new(mesh.clone(), Coefficients::default(), ChargeSystem::single(1.0), Nonlinearity::Linearized)?;
    let reference = {
        let fine = problem.with_mesh(refine_uniform(&refine_uniform(&mesh)))?;
        qoi(&fine, &solve_in_degree(&fine, Degree::P2)?)?
    };
    println!("reference goal {reference:.8}\n");
    for kind in [StrategyKind::Uniform, StrategyKind::Ucr, StrategyKind::Acr, StrategyKind::Classical] {
        let cfg = StrategyConfig { kind, max_levels: 1, ..Default::default() };
        let records = run_refinement_loop(problem.with_mesh(mesh.clone())?, &cfg, Some(reference))?;
        let actions: Vec<String> =
            records.iter().filter_map(|r| r.action.as_ref()).map(|a| a.to_string()).collect();
        println!("{} (actions: {})", kind.name(), actions.join(", "));
        println!("{}", emit_table(&records, TableFormat::Aligned));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
