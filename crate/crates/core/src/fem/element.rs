use crate::mesh::{Point3, EDGE_VERTICES};

/// Polynomial degree of a Lagrange space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    /// Local degrees of freedom per tetrahedron.
    pub const fn dofs_per_cell(self) -> usize {
        match self {
            Degree::P1 => 4,
            Degree::P2 => 10,
        }
    }

    pub const fn order(self) -> usize {
        match self {
            Degree::P1 => 1,
            Degree::P2 => 2,
        }
    }
}

/// Affine tetrahedron data: volume and barycentric gradients.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    pub points: [Point3; 4],
    pub volume: f64,
    pub grad_lambda: [Point3; 4],
}

impl CellGeometry {
    pub fn new(points: [Point3; 4]) -> Self {
        let c1 = points[1] - points[0];
        let c2 = points[2] - points[0];
        let c3 = points[3] - points[0];
        let det = c1.dot(c2.cross(c3));
        let inv = 1.0 / det;
        let g1 = c2.cross(c3) * inv;
        let g2 = c3.cross(c1) * inv;
        let g3 = c1.cross(c2) * inv;
        CellGeometry { points, volume: det / 6.0, grad_lambda: [-(g1 + g2 + g3), g1, g2, g3] }
    }

    pub fn map(&self, bary: &[f64; 4]) -> Point3 {
        let mut p = Point3::ORIGIN;
        for k in 0..4 {
            p += self.points[k] * bary[k];
        }
        p
    }
}

/// Values of the local basis at a barycentric point.
pub fn basis_values(deg: Degree, l: &[f64; 4], out: &mut [f64; 10]) {
    match deg {
        Degree::P1 => out[..4].copy_from_slice(l),
        Degree::P2 => {
            for i in 0..4 {
                out[i] = l[i] * (2.0 * l[i] - 1.0);
            }
            for (k, [i, j]) in EDGE_VERTICES.iter().enumerate() {
                out[4 + k] = 4.0 * l[*i] * l[*j];
            }
        }
    }
}

/// Gradients of the local basis at a barycentric point.
pub fn basis_grads(deg: Degree, l: &[f64; 4], g: &[Point3; 4], out: &mut [Point3; 10]) {
    match deg {
        Degree::P1 => out[..4].copy_from_slice(g),
        Degree::P2 => {
            for i in 0..4 {
                out[i] = g[i] * (4.0 * l[i] - 1.0);
            }
            for (k, [i, j]) in EDGE_VERTICES.iter().enumerate() {
                out[4 + k] = (g[*j] * l[*i] + g[*i] * l[*j]) * 4.0;
            }
        }
    }
}

/// Coefficients of a field restricted to one cell.
#[derive(Clone, Copy, Debug)]
pub struct LocalField {
    pub degree: Degree,
    pub coeffs: [f64; 10],
}

impl LocalField {
    pub fn value(&self, l: &[f64; 4]) -> f64 {
        let mut phi = [0.0; 10];
        basis_values(self.degree, l, &mut phi);
        let n = self.degree.dofs_per_cell();
        (0..n).map(|k| phi[k] * self.coeffs[k]).sum()
    }

    pub fn gradient(&self, l: &[f64; 4], geom: &CellGeometry) -> Point3 {
        let mut g = [Point3::ORIGIN; 10];
        basis_grads(self.degree, l, &geom.grad_lambda, &mut g);
        let n = self.degree.dofs_per_cell();
        let mut s = Point3::ORIGIN;
        for k in 0..n {
            s += g[k] * self.coeffs[k];
        }
        s
    }
}

/// Barycentric point of the cell corresponding to a point of local face `f`
/// given by barycentric coordinates `t` of the face vertices in local order.
pub fn face_to_cell_bary(f: usize, t: &[f64; 3]) -> [f64; 4] {
    let lv = crate::mesh::FACE_VERTICES[f];
    let mut l = [0.0; 4];
    for k in 0..3 {
        l[lv[k]] = t[k];
    }
    l
}
