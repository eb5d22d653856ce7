use std::sync::Arc;

use super::element::{CellGeometry, Degree, LocalField};
use super::space::FunctionSpace;
use super::FemError;
use crate::mesh::{Point3, EDGE_VERTICES};

/// Coefficient vector over a function space.
#[derive(Debug, Clone)]
pub struct FeField {
    space: Arc<FunctionSpace>,
    values: Vec<f64>,
}

impl FeField {
    pub fn new(space: Arc<FunctionSpace>, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != space.num_dofs() {
            return Err(FemError::SupportMismatch(format!(
                "{} values for a space with {} dofs",
                values.len(),
                space.num_dofs()
            )));
        }
        Ok(FeField { space, values })
    }

    pub fn zeros(space: Arc<FunctionSpace>) -> Self {
        let n = space.num_dofs();
        FeField { space, values: vec![0.0; n] }
    }

    pub fn space(&self) -> &Arc<FunctionSpace> {
        &self.space
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn degree(&self) -> Degree {
        self.space.degree()
    }

    /// Local coefficients on `cell`, or `None` outside the support.
    pub fn local(&self, cell: usize) -> Option<LocalField> {
        if !self.space.contains_cell(cell) {
            return None;
        }
        let mut coeffs = [0.0; 10];
        for (k, &d) in self.space.cell_dofs(cell).iter().enumerate() {
            coeffs[k] = self.values[d];
        }
        Some(LocalField { degree: self.space.degree(), coeffs })
    }

    pub fn value_in_cell(&self, cell: usize, bary: &[f64; 4]) -> Option<f64> {
        self.local(cell).map(|l| l.value(bary))
    }

    pub fn gradient_in_cell(&self, cell: usize, bary: &[f64; 4]) -> Option<Point3> {
        let geom = CellGeometry::new(self.space.mesh().cell_points(cell));
        self.local(cell).map(|l| l.gradient(bary, &geom))
    }

    /// Point evaluation through point location.
    pub fn evaluate(&self, p: Point3) -> Result<f64, FemError> {
        let loc = self.space.mesh().locate(p).ok_or(FemError::PointOutsideMesh(p))?;
        self.value_in_cell(loc.cell, &loc.bary).ok_or(FemError::PointOutsideSupport(p))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += s * other` on the same space.
    pub fn add_scaled(&mut self, other: &FeField, s: f64) -> Result<(), FemError> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(FemError::SupportMismatch("fields live on different spaces".into()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }
}

/// Which dofs an interpolant fills; the others are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofMask {
    All,
    BoundaryOnly,
}

/// Nodal interpolant of `g` at dof points.
pub fn interpolate_nodal(
    g: impl Fn(Point3) -> f64,
    space: &Arc<FunctionSpace>,
    mask: DofMask,
) -> Result<FeField, FemError> {
    let mut values = vec![0.0; space.num_dofs()];
    for (d, v) in values.iter_mut().enumerate() {
        if mask == DofMask::All || space.is_boundary(d) {
            let x = g(space.dof_point(d));
            if !x.is_finite() {
                return Err(FemError::NonFinite { dof: d });
            }
            *v = x;
        }
    }
    FeField::new(space.clone(), values)
}

/// Nodal interpolant of a field into another space on the same mesh. The
/// target support must be covered by the source support.
pub fn interpolate_field(f: &FeField, target: &Arc<FunctionSpace>) -> Result<FeField, FemError> {
    if !f.space().same_mesh(target) {
        return Err(FemError::MeshMismatch);
    }
    let npc = target.degree().dofs_per_cell();
    let mut values = vec![0.0; target.num_dofs()];
    let mut done = vec![false; target.num_dofs()];
    for c in target.cells() {
        let local = f.local(c).ok_or_else(|| {
            FemError::SupportMismatch(format!("source field undefined on cell {c}"))
        })?;
        let dofs = target.cell_dofs(c);
        for k in 0..npc {
            if done[dofs[k]] {
                continue;
            }
            let mut l = [0.0; 4];
            if k < 4 {
                l[k] = 1.0;
            } else {
                let [i, j] = EDGE_VERTICES[k - 4];
                l[i] = 0.5;
                l[j] = 0.5;
            }
            values[dofs[k]] = local.value(&l);
            done[dofs[k]] = true;
        }
    }
    FeField::new(target.clone(), values)
}
