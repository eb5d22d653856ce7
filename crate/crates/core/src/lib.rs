//! Goal-oriented a posteriori error estimation and adaptive mesh refinement
//! for the Poisson-Boltzmann equation with a three-term potential splitting.

pub mod fem;
pub mod mesh;
pub mod solvers;
pub mod estimator;
pub mod model;
pub mod oracle;
pub mod refine;
pub mod app;
