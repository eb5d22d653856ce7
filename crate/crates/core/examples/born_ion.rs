//! A unit charge at the centre of a dielectric ball: the finite element goal
//! value against the closed-form linearized energy and the radial solver.

use std::error::Error;

use pbe_core::fem::Degree;
use pbe_core::mesh::{build_ball_mesh, refine_uniform, snap_to_ball};
use pbe_core::model::{qoi, solve, solve_in_degree, ChargeSystem, Coefficients, Nonlinearity, PbeProblem};
use pbe_core::oracle::{born_energy_limit, born_linear_closed_form, solve_radial};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (r_m, r_outer) = (2.0, 20.0);
    let coeffs = Coefficients::default();
    let closed = born_linear_closed_form(r_m, &coeffs, 1.0, r_outer);
    let radial = solve_radial(r_m, r_outer, &coeffs, 1.0, 20_000, Nonlinearity::Linearized)?;
    println!("closed form      {closed:.8}");
    println!("radial solver    {:.8}", radial.qoi);
    println!("salt-free limit  {:.8}", born_energy_limit(r_m, &coeffs, 1.0));

    // Linear interface nodes all lie on the sphere, so the linear harmonic data
    // match the sphere exactly; quadratic edge nodes lie inside it and the
    // quadratic goal tracks the polyhedral geometry until refinement closes the gap.
    let mut mesh = build_ball_mesh(r_m, r_outer, 2, 1)?;
    for level in 0..3 {
        if level > 0 {
            // Refined shells are pushed back onto the spheres so the geometry converges.
            mesh = snap_to_ball(&refine_uniform(&mesh), r_m, r_outer)?;
        }
        let p = PbeProblem::new(mesh.clone(), coeffs, ChargeSystem::single(1.0), Nonlinearity::Linearized)?;
        let linear = qoi(&p, &solve(&p)?)?;
        let quadratic = qoi(&p, &solve_in_degree(&p, Degree::P2)?)?;
        println!(
            "N={:>6}  P1 {linear:.8} (gap {:.1e})  P2 {quadratic:.8} (gap {:.1e})",
            mesh.num_vertices(),
            (linear - closed).abs(),
            (quadratic - closed).abs()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
