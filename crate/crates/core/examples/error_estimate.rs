//! The goal error estimate split by source, checked against the goal value
//! of an enriched quadratic solve on the same mesh.

use std::error::Error;

use pbe_core::estimator::{effectivity, estimate, EstimatorMode, Source};
use pbe_core::fem::Degree;
use pbe_core::mesh::build_ball_mesh;
use pbe_core::model::{qoi, solve, solve_in_degree, ChargeSystem, Coefficients, Nonlinearity, PbeProblem};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mesh = build_ball_mesh(2.0, 20.0, 2, 1)?;
    let p = PbeProblem::new(mesh, Coefficients::default(), ChargeSystem::single(1.0), Nonlinearity::Linearized)?;
    let sol = solve(&p)?;
    let q = qoi(&p, &sol)?;
    let (_, b) = estimate(&p, &sol, EstimatorMode::Standard)?;
    println!("goal {q:.8}, estimated error {:.4e}", b.total);
    for s in Source::ALL {
        println!("  {:<8} {:>11.3e}", s.name(), b.component(s));
    }
    println!("  {:<8} {:>11.3e}", "E_neg", b.e_neg);

    let (_, alt) = estimate(&p, &sol, EstimatorMode::AlternateWeakForm)?;
    println!("alternate weak form total {:.4e} (flux remainder {:.3e})", alt.total, alt.e_har.unwrap_or(0.0));

    // For the linearized model the estimate is the enriched goal minus the linear one.
    let enriched = qoi(&p, &solve_in_degree(&p, Degree::P2)?)?;
    println!("enriched goal difference {:.4e}, effectivity {:.4}", enriched - q, effectivity(b.total, enriched - q)?);

    let largest = b.classical_per_cell.iter().map(|v| v.abs()).fold(0.0, f64::max);
    println!("largest classical cell indicator {largest:.3e} over {} cells", b.classical_per_cell.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
