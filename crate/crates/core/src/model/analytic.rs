use super::{ChargeSystem, Coefficients, ModelError};
use crate::mesh::Point3;

/// Singular Coulomb part `(C/eps_m) sum q_i / |x - x_i|`.
pub fn singular_potential(x: Point3, charges: &ChargeSystem, c: &Coefficients) -> Result<f64, ModelError> {
    let mut s = 0.0;
    for (i, q) in charges.charges().iter().enumerate() {
        let r = x.distance(q.position);
        if r == 0.0 {
            return Err(ModelError::Singularity { charge: i });
        }
        s += q.charge / r;
    }
    Ok(c.charge_scale / c.eps_m * s)
}

/// Gradient of the singular part.
pub fn singular_gradient(x: Point3, charges: &ChargeSystem, c: &Coefficients) -> Result<Point3, ModelError> {
    let mut g = Point3::ORIGIN;
    for (i, q) in charges.charges().iter().enumerate() {
        let d = x - q.position;
        let r = d.norm();
        if r == 0.0 {
            return Err(ModelError::Singularity { charge: i });
        }
        g += d * (-q.charge / (r * r * r));
    }
    Ok(g * (c.charge_scale / c.eps_m))
}

/// Normal flux `eps_m du_s/dn` of the singular part.
pub fn singular_flux(x: Point3, n: Point3, charges: &ChargeSystem, c: &Coefficients) -> Result<f64, ModelError> {
    Ok(c.eps_m * singular_gradient(x, charges, c)?.dot(n))
}

/// Screened Coulomb boundary data `C sum q_i exp(-k r_i) / (eps_s r_i)` with
/// `k = sqrt(kappa_sq / eps_s)`.
pub fn boundary_value_g(x: Point3, charges: &ChargeSystem, c: &Coefficients) -> Result<f64, ModelError> {
    let k = c.screening_length_inverse();
    let mut s = 0.0;
    for (i, q) in charges.charges().iter().enumerate() {
        let r = x.distance(q.position);
        if r == 0.0 {
            return Err(ModelError::Singularity { charge: i });
        }
        s += q.charge * (-k * r).exp() / (c.eps_s * r);
    }
    Ok(c.charge_scale * s)
}
