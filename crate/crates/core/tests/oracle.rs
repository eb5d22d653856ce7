mod common;

use pbe_core::model::{Coefficients, Nonlinearity};
use pbe_core::oracle::*;

const N: usize = 100_000;

#[test]
fn closed_form_matches_the_radial_solve() {
    let c = Coefficients::default();
    for q in [1.0, -2.0] {
        let fd = solve_radial(2.0, 20.0, &c, q, N, Nonlinearity::Linearized).unwrap();
        let exact = born_linear_closed_form(2.0, &c, q, 20.0);
        assert!(common::rel(fd.qoi, exact) < 1e-6, "{} vs {exact}", fd.qoi);
    }
    let other = Coefficients { eps_m: 2.0, eps_s: 40.0, kappa_sq: 3.0, charge_scale: 7.0 };
    let fd = solve_radial(1.5, 12.0, &other, 0.5, N, Nonlinearity::Linearized).unwrap();
    assert!(common::rel(fd.qoi, born_linear_closed_form(1.5, &other, 0.5, 12.0)) < 1e-6);
}

#[test]
fn salt_free_closed_form_is_the_born_energy() {
    let c = Coefficients { kappa_sq: 0.0, ..Default::default() };
    for r_outer in [5.0, 20.0, 1e4] {
        let v = born_linear_closed_form(2.0, &c, 1.0, r_outer);
        assert!(common::rel(v, born_energy_limit(2.0, &c, 1.0)) < 1e-14);
    }
    let limit = 1.0 * (1.0 / 78.0 - 1.0) / 2.0;
    assert!(common::rel(born_energy_limit(2.0, &c, 1.0), limit) < 1e-15);
}

#[test]
fn screened_closed_form_approaches_born_as_salt_vanishes() {
    let born = born_energy_limit(2.0, &Coefficients::default(), 1.0);
    let gaps: Vec<f64> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&k| {
            let c = Coefficients { kappa_sq: k, ..Default::default() };
            (born_linear_closed_form(2.0, &c, 1.0, 20.0) - born).abs()
        })
        .collect();
    // First order in the screening rate, which scales with sqrt(kappa_sq).
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > 9.0 && ratio < 11.0, "ratio {ratio}");
    }
    assert!(gaps[2] < 1e-5 * born.abs());
}

#[test]
fn radial_solve_converges_at_second_order() {
    let c = Coefficients::default();
    let q: Vec<f64> = [500, 1000, 2000]
        .iter()
        .map(|&n| solve_radial(2.0, 20.0, &c, 1.0, n, Nonlinearity::Linearized).unwrap().qoi)
        .collect();
    let ratio = (q[0] - q[1]) / (q[1] - q[2]);
    assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    let richardson = q[2] + (q[2] - q[1]) / 3.0;
    let exact = born_linear_closed_form(2.0, &c, 1.0, 20.0);
    assert!((richardson - exact).abs() < 0.05 * (q[2] - exact).abs());
}

#[test]
fn zero_charge_gives_zero() {
    for nl in [Nonlinearity::Linearized, Nonlinearity::Nonlinear] {
        let s = solve_radial(2.0, 20.0, &Coefficients::default(), 0.0, 1000, nl).unwrap();
        assert_eq!(s.qoi, 0.0);
        assert!(s.regular.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn grid_places_a_node_on_the_interface() {
    let s = solve_radial(2.0, 20.0, &Coefficients::default(), 1.0, 1001, Nonlinearity::Linearized).unwrap();
    assert!(s.radii.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(s.radii[0], 0.0);
    assert_eq!(*s.radii.last().unwrap(), 20.0);
    assert!(s.radii.contains(&2.0));
    assert_eq!(s.harmonic, -0.5);
}

#[test]
fn reaction_energy_shrinks_with_dielectric_contrast() {
    let mut last = f64::INFINITY;
    for eps_s in [78.0, 20.0, 5.0, 1.5, 1.0] {
        let c = Coefficients { eps_s, kappa_sq: 0.0, ..Default::default() };
        let v = born_linear_closed_form(2.0, &c, 1.0, 20.0).abs();
        assert!(v < last);
        last = v;
    }
    assert!(last < 1e-15);
}

#[test]
fn nonlinear_screening_is_stronger_than_linear() {
    let c = Coefficients { charge_scale: 50.0, ..Default::default() };
    let lin = solve_radial(2.0, 20.0, &c, 1.0, 20_000, Nonlinearity::Linearized).unwrap();
    let nl = solve_radial(2.0, 20.0, &c, 1.0, 20_000, Nonlinearity::Nonlinear).unwrap();
    assert!(lin.qoi < 0.0 && nl.qoi < 0.0);
    assert!(nl.qoi.abs() > lin.qoi.abs());
}

#[test]
fn invalid_input_is_rejected() {
    let c = Coefficients::default();
    assert!(matches!(
        solve_radial(2.0, 20.0, &c, 1.0, 15, Nonlinearity::Linearized),
        Err(OracleError::GridTooCoarse(15))
    ));
    assert!(matches!(
        solve_radial(2.0, 1.0, &c, 1.0, 100, Nonlinearity::Linearized),
        Err(OracleError::InvalidInput(_))
    ));
    let bad = Coefficients { eps_s: -1.0, ..c };
    assert!(solve_radial(2.0, 20.0, &bad, 1.0, 100, Nonlinearity::Linearized).is_err());
}
