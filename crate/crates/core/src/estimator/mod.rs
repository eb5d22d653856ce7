//! Goal-oriented error estimation: adjoint solves in degree-2 spaces, boundary
//! liftings, and the split of the goal error into per-source components with
//! signed per-cell contributions.
//!
//! Only the one-way coupled adjoint (regular part first, harmonic part
//! second) is implemented; the fully coupled adjoint with interface data
//! for the harmonic part is ill-posed.

mod adjoint;
mod breakdown;

pub use adjoint::{adjoint_regular_operator, build_liftings, qoi_load, solve_adjoint, AdjointSolution, LiftingPair};
pub use breakdown::{
    classical_indicators, compute_error_breakdown, estimate, galerkin_residual, source_indicators, ErrorBreakdown,
    EstimatorMode,
};

use crate::fem::FemError;
use crate::model::ModelError;
use crate::solvers::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum EstimatorError {
    #[error("inputs live on different meshes")]
    MeshMismatch,
    #[error("nonlinear adjoint requires the converged regular component")]
    MissingPrimal,
    #[error("reference error is zero")]
    DivisionByZero,
    #[error("unknown error source `{0}`")]
    UnknownSource(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Origin of a part of the goal error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// Regular-component solve over the whole mesh.
    Regular,
    /// Harmonic-component solve in the molecular region.
    Harmonic,
    /// Interface boundary data.
    Interface,
    /// Outer boundary data.
    OuterBoundary,
}

impl Source {
    /// Fixed order used to break ties.
    pub const ALL: [Source; 4] = [Source::Regular, Source::Harmonic, Source::Interface, Source::OuterBoundary];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Source::Regular => "R",
            Source::Harmonic => "M",
            Source::Interface => "Gamma",
            Source::OuterBoundary => "dOmega",
        }
    }

    pub fn parse(s: &str) -> Result<Source, EstimatorError> {
        match s {
            "R" | "r" | "regular" => Ok(Source::Regular),
            "M" | "m" | "harmonic" | "molecular" => Ok(Source::Harmonic),
            "Gamma" | "gamma" | "interface" => Ok(Source::Interface),
            "dOmega" | "domega" | "outer" | "boundary" => Ok(Source::OuterBoundary),
            _ => Err(EstimatorError::UnknownSource(s.to_string())),
        }
    }
}

/// Ratio of the estimated to the reference error.
pub fn effectivity(estimate: f64, reference_error: f64) -> Result<f64, EstimatorError> {
    if reference_error == 0.0 {
        return Err(EstimatorError::DivisionByZero);
    }
    Ok(estimate / reference_error)
}
