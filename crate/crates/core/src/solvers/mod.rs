//! Preconditioned conjugate gradients and damped Newton.

mod cg;
mod newton;

pub use cg::{cg_solve, cg_solve_from, CgReport, Preconditioner, SolverConfig};
pub use newton::{newton_solve, NewtonConfig, NewtonReport, NonlinearSystem};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("conjugate gradients did not converge: residual {residual:e} > target {target:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64, target: f64 },
    #[error("conjugate gradient breakdown: {0}")]
    Breakdown(String),
    #[error("Newton did not converge: residual {residual:e} > target {target:e} after {iterations} iterations")]
    NewtonFailure { iterations: usize, residual: f64, target: f64 },
    #[error("line search failed at Newton iteration {iteration} (residual {residual:e})")]
    LineSearchFailure { iteration: usize, residual: f64 },
    #[error("non-finite {0}")]
    NonFinite(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
}
