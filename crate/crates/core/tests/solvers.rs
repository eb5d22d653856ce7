use nalgebra::{DMatrix, DVector};
use pbe_core::fem::SparseMatrix;
use pbe_core::solvers::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random SPD matrix `B B^T + n I` with a random sparsity mask on `B`.
fn random_spd(seed: u64, n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |_, _| if rng.gen::<f64>() < 0.3 { rng.gen_range(-1.0..1.0) } else { 0.0 });
    let a = &b * b.transpose() + DMatrix::identity(n, n) * (n as f64 * 0.1);
    let rhs = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    (a, rhs)
}

fn to_sparse(a: &DMatrix<f64>) -> SparseMatrix {
    let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    SparseMatrix::from_dense(&rows)
}

#[test]
fn cg_matches_dense_solve_on_seeded_systems() {
    for seed in 0..50u64 {
        let (a, b) = random_spd(seed, 20);
        let want = a.clone().cholesky().unwrap().solve(&b);
        let sa = to_sparse(&a);
        for pc in [Preconditioner::None, Preconditioner::Jacobi, Preconditioner::SymmetricGaussSeidel] {
            let cfg = SolverConfig { rel_tolerance: 1e-12, preconditioner: pc, ..Default::default() };
            let (x, report) = cg_solve(&sa, b.as_slice(), &cfg).unwrap();
            assert!(report.residual_norm <= report.target);
            for i in 0..20 {
                assert!((x[i] - want[i]).abs() < 1e-8, "seed {seed} {pc:?}");
            }
        }
    }
}

#[test]
fn cg_zero_rhs_gives_zero() {
    let (a, _) = random_spd(7, 20);
    let (x, report) = cg_solve(&to_sparse(&a), &[0.0; 20], &SolverConfig::default()).unwrap();
    assert!(x.iter().all(|v| *v == 0.0));
    assert_eq!(report.iterations, 0);
}

#[test]
fn cg_reports_non_convergence() {
    let (a, b) = random_spd(3, 20);
    let cfg = SolverConfig {
        rel_tolerance: 1e-14,
        max_iterations: Some(1),
        preconditioner: Preconditioner::None,
        ..Default::default()
    };
    let err = cg_solve(&to_sparse(&a), b.as_slice(), &cfg).unwrap_err();
    assert!(matches!(err, SolverError::NonConvergence { iterations: 1, .. }));
}

#[test]
fn cg_rejects_non_finite_input() {
    let (a, mut b) = random_spd(4, 20);
    b[3] = f64::NAN;
    assert!(cg_solve(&to_sparse(&a), b.as_slice(), &SolverConfig::default()).is_err());
}

#[test]
fn cg_warm_start_from_solution_takes_no_iterations() {
    let (a, b) = random_spd(5, 20);
    let sa = to_sparse(&a);
    let cfg = SolverConfig::default();
    let (x, _) = cg_solve(&sa, b.as_slice(), &cfg).unwrap();
    let (y, report) = cg_solve_from(&sa, b.as_slice(), x.clone(), &cfg).unwrap();
    assert!(report.iterations <= 1);
    for (p, q) in x.iter().zip(&y) {
        assert!((p - q).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cg_residual_meets_its_target(seed in 0u64..10_000, n in 2usize..30) {
        let (a, b) = random_spd(seed, n);
        let sa = to_sparse(&a);
        let cfg = SolverConfig::default();
        let (x, report) = cg_solve(&sa, b.as_slice(), &cfg).unwrap();
        let r = &b - &a * DVector::from_column_slice(&x);
        prop_assert!(r.norm() <= report.target * (1.0 + 1e-6) + 1e-12);
    }
}

/// `A u + c sinh(u) = f` componentwise on top of an SPD matrix.
struct SinhSystem {
    a: SparseMatrix,
    c: f64,
    f: Vec<f64>,
}

impl NonlinearSystem for SinhSystem {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>, SolverError> {
        let au = self.a.apply(u);
        Ok(au.iter().zip(u).zip(&self.f).map(|((x, v), f)| x + self.c * v.sinh() - f).collect())
    }

    fn jacobian(&self, u: &[f64]) -> Result<SparseMatrix, SolverError> {
        let mut j = self.a.clone();
        for (i, v) in u.iter().enumerate() {
            j.add_at(i, i, self.c * v.cosh());
        }
        Ok(j)
    }
}

#[test]
fn newton_solves_a_linear_system_in_one_step() {
    let (a, b) = random_spd(11, 20);
    let want = a.clone().cholesky().unwrap().solve(&b);
    let sys = SinhSystem { a: to_sparse(&a), c: 0.0, f: b.as_slice().to_vec() };
    let lin = SolverConfig { rel_tolerance: 1e-13, ..Default::default() };
    let (u, report) = newton_solve(&sys, vec![0.0; 20], &NewtonConfig::default(), &lin).unwrap();
    assert_eq!(report.iterations, 1);
    for i in 0..20 {
        assert!((u[i] - want[i]).abs() < 1e-8);
    }
}

#[test]
fn newton_solves_a_sinh_system_with_decreasing_residuals() {
    let (a, b) = random_spd(12, 20);
    let f: Vec<f64> = b.iter().map(|v| 20.0 * v).collect();
    let sys = SinhSystem { a: to_sparse(&a), c: 1.0, f };
    let (u, report) = newton_solve(&sys, vec![0.0; 20], &NewtonConfig::default(), &SolverConfig::default()).unwrap();
    assert!(report.residual_history.windows(2).all(|w| w[1] < w[0]));
    let r = sys.residual(&u).unwrap();
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm <= 1e-9 * report.residual_history[0]);
}

#[test]
fn newton_reports_failure_when_out_of_iterations() {
    let (a, b) = random_spd(13, 20);
    let f: Vec<f64> = b.iter().map(|v| 50.0 * v).collect();
    let sys = SinhSystem { a: to_sparse(&a), c: 1.0, f };
    let cfg = NewtonConfig { max_iterations: 1, ..Default::default() };
    let err = newton_solve(&sys, vec![0.0; 20], &cfg, &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, SolverError::NewtonFailure { iterations: 1, .. }));
}

#[test]
fn preconditioner_names_round_trip() {
    for pc in [Preconditioner::None, Preconditioner::Jacobi, Preconditioner::SymmetricGaussSeidel] {
        assert_eq!(Preconditioner::parse(pc.name()), Some(pc));
    }
    assert_eq!(Preconditioner::parse("ilu"), None);
}
