//! The one-dimensional radial solver for a central charge: agreement with the
//! closed form, second-order convergence and the nonlinear response.

use std::error::Error;

use pbe_core::model::{Coefficients, Nonlinearity};
use pbe_core::oracle::{born_linear_closed_form, solve_radial};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (r_m, r_outer) = (2.0, 20.0);
    let c = Coefficients::default();
    let exact = born_linear_closed_form(r_m, &c, 1.0, r_outer);
    let mut last = None;
    for n in [250, 500, 1000, 2000, 4000] {
        let e = (solve_radial(r_m, r_outer, &c, 1.0, n, Nonlinearity::Linearized)?.qoi - exact).abs();
        let ratio = last.map_or(String::new(), |l: f64| format!("  ratio {:.2}", l / e));
        println!("N={n:>5}  error {e:.3e}{ratio}");
        last = Some(e);
    }

    // With physical units (charges in e, lengths in angstrom, energies in k_B T)
    // the unit constant is the Bjerrum length in angstrom.
    let physical = Coefficients { charge_scale: 560.2, ..c };
    for (q, salt) in [(1.0, 1.0), (5.0, 5.0), (10.0, 10.0)] {
        let coeffs = Coefficients { kappa_sq: c.kappa_sq * salt, ..physical };
        let lin = solve_radial(r_m, r_outer, &coeffs, q, 20_000, Nonlinearity::Linearized)?;
        let non = solve_radial(r_m, r_outer, &coeffs, q, 20_000, Nonlinearity::Nonlinear)?;
        println!(
            "charge {q:>4}, salt x{salt:<4}: linearized {:>12.3} nonlinear {:>12.3} relative gap {:.2e}",
            lin.qoi,
            non.qoi,
            ((non.qoi - lin.qoi) / lin.qoi).abs()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
