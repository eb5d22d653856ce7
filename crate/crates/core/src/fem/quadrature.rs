use std::sync::OnceLock;

/// Quadrature on a reference simplex. Points are barycentric; weights sum to
/// the reference measure (1/6 for the tetrahedron, 1/2 for the triangle).
#[derive(Clone, Debug)]
pub struct QuadratureRule<const N: usize> {
    pub points: Vec<[f64; N]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

pub type TetRule = QuadratureRule<4>;
pub type TriRule = QuadratureRule<3>;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Symmetric four-point rule, exact for degree 2.
pub fn tet_degree2() -> &'static TetRule {
    static RULE: OnceLock<TetRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let a = 0.585_410_196_624_968_5;
        let b = 0.138_196_601_125_010_5;
        TetRule {
            points: vec![[a, b, b, b], [b, a, b, b], [b, b, a, b], [b, b, b, a]],
            weights: vec![1.0 / 24.0; 4],
            degree: 2,
        }
    })
}

/// Collapsed Gauss-Legendre product rule, exact for degree 4.
pub fn tet_degree4() -> &'static TetRule {
    static RULE: OnceLock<TetRule> = OnceLock::new();
    RULE.get_or_init(|| collapsed_tet_rule(4, 3, 3, 4))
}

/// Collapsed product rule with `nu x nv x nw` Gauss points.
pub fn collapsed_tet_rule(nu: usize, nv: usize, nw: usize, degree: usize) -> TetRule {
    let (u, wu) = gauss_legendre_unit(nu);
    let (v, wv) = gauss_legendre_unit(nv);
    let (w, ww) = gauss_legendre_unit(nw);
    let mut points = Vec::with_capacity(nu * nv * nw);
    let mut weights = Vec::with_capacity(nu * nv * nw);
    for i in 0..nu {
        for j in 0..nv {
            for k in 0..nw {
                let x = u[i];
                let y = (1.0 - u[i]) * v[j];
                let z = (1.0 - u[i]) * (1.0 - v[j]) * w[k];
                points.push([1.0 - x - y - z, x, y, z]);
                weights.push(wu[i] * wv[j] * ww[k] * (1.0 - u[i]).powi(2) * (1.0 - v[j]));
            }
        }
    }
    TetRule { points, weights, degree }
}

/// Six-point symmetric triangle rule, exact for degree 4.
pub fn tri_degree4() -> &'static TriRule {
    static RULE: OnceLock<TriRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (a1, b1, w1) = (0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011);
        let (a2, b2, w2) = (0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322);
        TriRule {
            points: vec![[b1, a1, a1], [a1, b1, a1], [a1, a1, b1], [b2, a2, a2], [a2, b2, a2], [a2, a2, b2]],
            weights: vec![w1 / 2.0, w1 / 2.0, w1 / 2.0, w2 / 2.0, w2 / 2.0, w2 / 2.0],
            degree: 4,
        }
    })
}
