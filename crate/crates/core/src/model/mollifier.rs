use std::sync::OnceLock;

use super::{ChargeSystem, ModelError, PbeProblem};
use crate::fem::{FeField, FemError};
use crate::fem::quadrature::gauss_legendre_unit;
use crate::mesh::{Point3, Region};

/// Unnormalised bump `exp(-1 / (1 - |y|^2))` on the unit ball.
fn bump(r_sq: f64) -> f64 {
    if r_sq < 1.0 {
        (-1.0 / (1.0 - r_sq)).exp()
    } else {
        0.0
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Normalisation constant making the bump integrate to one over R^3.
pub fn mollifier_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let radial = adaptive_simpson(&|r| r * r * bump(r * r), 0.0, 1.0, 1e-15);
        1.0 / (4.0 * std::f64::consts::PI * radial)
    })
}

/// Normalised mollifier on the unit ball.
pub fn mollifier(y: Point3) -> f64 {
    mollifier_constant() * bump(y.norm_sq())
}

/// Goal weight `sum q_i eta^-3 rho((x - x_i) / eta)`.
pub fn psi(x: Point3, charges: &ChargeSystem, eta: f64) -> f64 {
    let inv = 1.0 / eta;
    charges
        .charges()
        .iter()
        .map(|q| q.charge * inv.powi(3) * mollifier((x - q.position) * inv))
        .sum()
}

/// Node counts of the spherical product rule around each charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QoiRule {
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for QoiRule {
    fn default() -> Self {
        QoiRule { radial: 8, polar: 8, azimuthal: 16 }
    }
}

impl QoiRule {
    /// Offsets in the unit ball and weights summing to one that integrate
    /// against the mollifier. Gauss-Legendre in radius and in the polar
    /// cosine, uniform in azimuth; odd moments vanish exactly.
    pub fn unit_nodes(&self) -> Vec<(Point3, f64)> {
        let (r, wr) = gauss_legendre_unit(self.radial);
        let (t, wt) = gauss_legendre_unit(self.polar);
        let mut nodes = Vec::with_capacity(self.radial * self.polar * self.azimuthal);
        for i in 0..self.radial {
            let radial_w = wr[i] * r[i] * r[i] * bump(r[i] * r[i]);
            for j in 0..self.polar {
                let cos_t = 2.0 * t[j] - 1.0;
                let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                for k in 0..self.azimuthal {
                    let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / self.azimuthal as f64;
                    let y = Point3::new(r[i] * sin_t * phi.cos(), r[i] * sin_t * phi.sin(), r[i] * cos_t);
                    nodes.push((y, radial_w * wt[j]));
                }
            }
        }
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        for n in nodes.iter_mut() {
            n.1 /= total;
        }
        nodes
    }
}

/// A quadrature node of the goal functional located in the mesh.
#[derive(Clone, Copy, Debug)]
pub struct QoiNode {
    pub charge: usize,
    pub cell: usize,
    pub bary: [f64; 4],
    /// Charge times normalised weight.
    pub weight: f64,
}

/// Located nodes of the goal functional. Every node must fall in a molecular cell.
pub fn locate_qoi_nodes(problem: &PbeProblem) -> Result<Vec<QoiNode>, ModelError> {
    let mesh = problem.mesh();
    let unit = problem.qoi_rule().unit_nodes();
    let eta = problem.qoi_eta();
    let mut out = Vec::with_capacity(unit.len() * problem.charges().len());
    for (i, q) in problem.charges().charges().iter().enumerate() {
        for (y, w) in &unit {
            let x = q.position + *y * eta;
            let loc = mesh.locate(x).ok_or(ModelError::Fem(FemError::PointOutsideMesh(x)))?;
            if mesh.region(loc.cell) != Region::Molecular {
                return Err(ModelError::SupportCrossesInterface { charge: i });
            }
            out.push(QoiNode { charge: i, cell: loc.cell, bary: loc.bary, weight: q.charge * w });
        }
    }
    Ok(out)
}

/// `(psi, f)` evaluated with the located nodes.
pub fn apply_qoi(nodes: &[QoiNode], f: &FeField) -> Result<f64, ModelError> {
    let mut s = 0.0;
    for n in nodes {
        let v = f.value_in_cell(n.cell, &n.bary).ok_or_else(|| {
            ModelError::Fem(FemError::SupportMismatch(format!("field undefined on cell {}", n.cell)))
        })?;
        s += n.weight * v;
    }
    Ok(s)
}
