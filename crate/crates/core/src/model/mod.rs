//! The Poisson-Boltzmann problem with the potential split into singular,
//! harmonic and regular components, and its goal functional.

mod analytic;
mod mollifier;
mod solve;

use std::sync::{Arc, OnceLock};

pub use analytic::{boundary_value_g, singular_flux, singular_gradient, singular_potential};
pub use mollifier::{apply_qoi, locate_qoi_nodes, mollifier, mollifier_constant, psi, QoiNode, QoiRule};
pub use solve::{
    qoi, regular_operator, solve, solve_harmonic, solve_harmonic_with_data, solve_in_degree, solve_regular,
    RegularSystem, Solution, SolveReport,
};

use crate::fem::{Degree, FemError, FunctionSpace, Support};
use crate::mesh::{point_triangle_distance, Point3, Region, SimplicialMesh};
use crate::solvers::{NewtonConfig, SolverConfig, SolverError};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("charge {index} lies outside the molecular region")]
    ChargeOutsideMolecule { index: usize },
    #[error("charge {index} is {distance:e} from the interface, not farther than the mollifier radius {eta:e}")]
    ChargeNearInterface { index: usize, distance: f64, eta: f64 },
    #[error("no charges given")]
    NoCharges,
    #[error("evaluation point coincides with charge {charge}")]
    Singularity { charge: usize },
    #[error("mollifier support of charge {charge} reaches a solvent cell")]
    SupportCrossesInterface { charge: usize },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Material and unit constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    /// Dielectric constant of the molecular region.
    pub eps_m: f64,
    /// Dielectric constant of the solvent.
    pub eps_s: f64,
    /// Squared modified Debye-Hueckel parameter in the solvent.
    pub kappa_sq: f64,
    /// Unit constant multiplying every charge.
    pub charge_scale: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients { eps_m: 1.0, eps_s: 78.0, kappa_sq: 0.918168, charge_scale: 1.0 }
    }
}

impl Coefficients {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidCoefficients(m.into()));
        if !(self.eps_m > 0.0) || !self.eps_m.is_finite() {
            return bad("eps_m must be positive");
        }
        if !(self.eps_s > 0.0) || !self.eps_s.is_finite() {
            return bad("eps_s must be positive");
        }
        if !(self.kappa_sq >= 0.0) || !self.kappa_sq.is_finite() {
            return bad("kappa_sq must be non-negative");
        }
        if !self.charge_scale.is_finite() || self.charge_scale == 0.0 {
            return bad("charge_scale must be finite and non-zero");
        }
        Ok(())
    }

    /// Decay rate `sqrt(kappa_sq / eps_s)` of the screened boundary data.
    pub fn screening_length_inverse(&self) -> f64 {
        (self.kappa_sq / self.eps_s).sqrt()
    }

    pub fn eps(&self, region: Region) -> f64 {
        match region {
            Region::Molecular => self.eps_m,
            Region::Solvent => self.eps_s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCharge {
    pub position: Point3,
    pub charge: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ChargeSystem {
    charges: Vec<PointCharge>,
}

impl ChargeSystem {
    pub fn new(charges: Vec<PointCharge>) -> Self {
        ChargeSystem { charges }
    }
    /// One charge at the origin.
    pub fn single(charge: f64) -> Self {
        ChargeSystem::new(vec![PointCharge { position: Point3::ORIGIN, charge }])
    }
    pub fn charges(&self) -> &[PointCharge] {
        &self.charges
    }
    pub fn len(&self) -> usize {
        self.charges.len()
    }
    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }
    pub fn total_charge(&self) -> f64 {
        self.charges.iter().map(|c| c.charge).sum()
    }
    pub fn positions(&self) -> Vec<Point3> {
        self.charges.iter().map(|c| c.position).collect()
    }
    /// Multiplies every charge by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        ChargeSystem::new(self.charges.iter().map(|c| PointCharge { charge: c.charge * s, ..*c }).collect())
    }
}

/// Form of the ionic term in the regular-component equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Nonlinearity {
    #[default]
    Linearized,
    Nonlinear,
}

impl Nonlinearity {
    pub fn name(self) -> &'static str {
        match self {
            Nonlinearity::Linearized => "linearized",
            Nonlinearity::Nonlinear => "nonlinear",
        }
    }
}

/// A fully specified problem on one mesh.
#[derive(Debug)]
pub struct PbeProblem {
    mesh: Arc<SimplicialMesh>,
    coefficients: Coefficients,
    charges: ChargeSystem,
    nonlinearity: Nonlinearity,
    qoi_eta: f64,
    qoi_rule: QoiRule,
    pub solver: SolverConfig,
    pub enriched_solver: SolverConfig,
    pub newton: NewtonConfig,
    spaces: [OnceLock<Arc<FunctionSpace>>; 4],
    qoi_nodes: OnceLock<Vec<QoiNode>>,
}

impl PbeProblem {
    pub fn new(
        mesh: impl Into<Arc<SimplicialMesh>>,
        coefficients: Coefficients,
        charges: ChargeSystem,
        nonlinearity: Nonlinearity,
    ) -> Result<Self, ModelError> {
        Self::with_eta(mesh, coefficients, charges, nonlinearity, 0.005)
    }

    pub fn with_eta(
        mesh: impl Into<Arc<SimplicialMesh>>,
        coefficients: Coefficients,
        charges: ChargeSystem,
        nonlinearity: Nonlinearity,
        qoi_eta: f64,
    ) -> Result<Self, ModelError> {
        coefficients.validate()?;
        if !(qoi_eta > 0.0) || !qoi_eta.is_finite() {
            return Err(ModelError::InvalidCoefficients("mollifier radius must be positive".into()));
        }
        let p = PbeProblem {
            mesh: mesh.into(),
            coefficients,
            charges,
            nonlinearity,
            qoi_eta,
            qoi_rule: QoiRule::default(),
            solver: SolverConfig::default(),
            enriched_solver: SolverConfig {
                preconditioner: crate::solvers::Preconditioner::SymmetricGaussSeidel,
                ..SolverConfig::default()
            },
            newton: NewtonConfig::default(),
            spaces: Default::default(),
            qoi_nodes: OnceLock::new(),
        };
        p.check_charges()?;
        Ok(p)
    }

    fn check_charges(&self) -> Result<(), ModelError> {
        if self.charges.is_empty() {
            return Err(ModelError::NoCharges);
        }
        for (i, q) in self.charges.charges().iter().enumerate() {
            let inside = self
                .mesh
                .locate(q.position)
                .is_some_and(|l| self.mesh.region(l.cell) == Region::Molecular);
            if !inside {
                return Err(ModelError::ChargeOutsideMolecule { index: i });
            }
            let d = self
                .mesh
                .interface_facets()
                .iter()
                .map(|f| {
                    let [a, b, c] = self.mesh.facet_vertices(*f).map(|v| self.mesh.vertices()[v]);
                    point_triangle_distance(q.position, a, b, c)
                })
                .fold(f64::INFINITY, f64::min);
            if d <= self.qoi_eta {
                return Err(ModelError::ChargeNearInterface { index: i, distance: d, eta: self.qoi_eta });
            }
        }
        Ok(())
    }

    /// Same settings on another mesh.
    pub fn with_mesh(&self, mesh: impl Into<Arc<SimplicialMesh>>) -> Result<Self, ModelError> {
        let mut p = Self::with_eta(mesh, self.coefficients, self.charges.clone(), self.nonlinearity, self.qoi_eta)?;
        p.qoi_rule = self.qoi_rule;
        p.solver = self.solver;
        p.enriched_solver = self.enriched_solver;
        p.newton = self.newton;
        Ok(p)
    }

    pub fn set_qoi_rule(&mut self, rule: QoiRule) {
        self.qoi_rule = rule;
        self.qoi_nodes = OnceLock::new();
    }

    pub fn mesh(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }
    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }
    pub fn charges(&self) -> &ChargeSystem {
        &self.charges
    }
    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }
    pub fn qoi_eta(&self) -> f64 {
        self.qoi_eta
    }
    pub fn qoi_rule(&self) -> QoiRule {
        self.qoi_rule
    }

    pub fn space(&self, degree: Degree, support: Support) -> Arc<FunctionSpace> {
        let slot = match (degree, support) {
            (Degree::P1, Support::WholeDomain) => 0,
            (Degree::P1, Support::MolecularOnly) => 1,
            (Degree::P2, Support::WholeDomain) => 2,
            (Degree::P2, Support::MolecularOnly) => 3,
        };
        self.spaces[slot]
            .get_or_init(|| FunctionSpace::new(self.mesh.clone(), degree, support))
            .clone()
    }

    pub fn qoi_nodes(&self) -> Result<&[QoiNode], ModelError> {
        if let Some(n) = self.qoi_nodes.get() {
            return Ok(n);
        }
        let nodes = locate_qoi_nodes(self)?;
        Ok(self.qoi_nodes.get_or_init(|| nodes))
    }

    pub fn singular_potential(&self, x: Point3) -> Result<f64, ModelError> {
        singular_potential(x, &self.charges, &self.coefficients)
    }
    pub fn singular_flux(&self, x: Point3, n: Point3) -> Result<f64, ModelError> {
        singular_flux(x, n, &self.charges, &self.coefficients)
    }
    pub fn boundary_value_g(&self, x: Point3) -> Result<f64, ModelError> {
        boundary_value_g(x, &self.charges, &self.coefficients)
    }
}
