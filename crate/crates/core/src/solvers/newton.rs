use super::cg::{cg_solve, SolverConfig};
use super::SolverError;
use crate::fem::SparseMatrix;

/// Damped Newton settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    /// Residual target relative to the initial residual norm.
    pub rel_tolerance: f64,
    /// Absolute residual floor.
    pub abs_tolerance: f64,
    pub max_iterations: usize,
    /// Initial step length of the backtracking line search.
    pub damping: f64,
    /// Smallest admissible step length.
    pub min_step: f64,
    /// Arguments of sinh and cosh are clamped to `[-clamp_bound, clamp_bound]`.
    pub clamp_bound: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            rel_tolerance: 1e-9,
            abs_tolerance: 1e-14,
            max_iterations: 50,
            damping: 1.0,
            min_step: 2f64.powi(-20),
            clamp_bound: 40.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Residual norm after each accepted step, starting with the initial one.
    pub residual_history: Vec<f64>,
}

/// A square nonlinear system `F(u) = 0` with symmetric positive definite Jacobian.
pub trait NonlinearSystem {
    fn residual(&self, u: &[f64]) -> Result<Vec<f64>, SolverError>;
    fn jacobian(&self, u: &[f64]) -> Result<SparseMatrix, SolverError>;
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton iteration with backtracking on the residual norm; each accepted
/// step strictly decreases it.
pub fn newton_solve<S: NonlinearSystem>(
    system: &S,
    mut u: Vec<f64>,
    cfg: &NewtonConfig,
    linear: &SolverConfig,
) -> Result<(Vec<f64>, NewtonReport), SolverError> {
    let mut f = system.residual(&u)?;
    let mut fnorm = norm(&f);
    let target = (cfg.rel_tolerance * fnorm).max(cfg.abs_tolerance);
    let mut history = vec![fnorm];
    let mut it = 0;
    while fnorm > target {
        if it == cfg.max_iterations {
            return Err(SolverError::NewtonFailure { iterations: it, residual: fnorm, target });
        }
        it += 1;
        let j = system.jacobian(&u)?;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let (delta, _) = cg_solve(&j, &neg, linear)?;
        let mut step = cfg.damping;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let ft = system.residual(&trial)?;
            let tn = norm(&ft);
            if tn.is_finite() && tn < fnorm {
                u = trial;
                f = ft;
                fnorm = tn;
                break;
            }
            step *= 0.5;
            if step < cfg.min_step {
                return Err(SolverError::LineSearchFailure { iteration: it, residual: fnorm });
            }
        }
        history.push(fnorm);
    }
    Ok((u, NewtonReport { iterations: it, residual_history: history }))
}
